"""State constructors: the counterexample family, its purification, named
reference states, seeded random states and JSON state files."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParams, ParseError, StateIOError, UnknownName, ValidationError
from .qmat import Ket, QState, kron, partial_trace, validate_state

ABC = ("a", "b", "c")
PURIFICATION_LABELS = ("a", "b", "c", "a'", "b'", "c'")


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the two-branch classical-b family: branch i carries
    rho_ac(p_i, theta_i)."""

    p1: float
    theta1: float
    p2: float
    theta2: float

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or not math.isfinite(v):
                raise InvalidParams(f"{name}={v!r} outside [0, 1]")
        for name in ("theta1", "theta2"):
            v = getattr(self, name)
            # small slack for pi-expressions evaluated in floating point
            if not (-1e-12 <= v <= math.pi / 2 + 1e-12) or not math.isfinite(v):
                raise InvalidParams(f"{name}={v!r} outside [0, pi/2]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p1, self.theta1, self.p2, self.theta2)

    def swapped(self) -> "FamilyParams":
        return FamilyParams(self.p2, self.theta2, self.p1, self.theta1)

    def to_dict(self) -> dict:
        return {"p1": self.p1, "theta1": self.theta1, "p2": self.p2, "theta2": self.theta2}


PRINTED_POINT = FamilyParams(0.1, 3 * math.pi / 10, 0.7, math.pi / 5)


def _psi_theta(theta: float) -> np.ndarray:
    # sin(theta)|01> + cos(theta)|10> on (a, c)
    return np.array([0.0, math.sin(theta), math.cos(theta), 0.0], dtype=complex)


def _rho_ac_matrix(p: float, theta: float) -> np.ndarray:
    psi = _psi_theta(theta)
    m = p * np.outer(psi, psi.conj())
    m[0, 0] += 1.0 - p
    return m


def rho_ac(p: float, theta: float) -> QState:
    """(1-p)|00><00| + p|psi_theta><psi_theta| on labels (a, c)."""
    if not (0.0 <= p <= 1.0):
        raise InvalidParams(f"p={p!r} outside [0, 1]")
    return validate_state(_rho_ac_matrix(p, theta), (2, 2), ("a", "c"))


def _embed_b_block(b_proj: np.ndarray, ac: np.ndarray) -> np.ndarray:
    # kron in (b, a, c) order, then permute to (a, b, c)
    t = kron(b_proj, ac).reshape(2, 2, 2, 2, 2, 2)
    return t.transpose(1, 0, 2, 4, 3, 5).reshape(8, 8)


def counterexample(params: FamilyParams) -> QState:
    """1/2 sum_i |i><i|_b ⊗ rho_ac(p_i, theta_i) in label order (a, b, c)."""
    m = np.zeros((8, 8), dtype=complex)
    for i, (p, th) in enumerate(((params.p1, params.theta1), (params.p2, params.theta2))):
        proj = np.zeros((2, 2))
        proj[i, i] = 1.0
        m += 0.5 * _embed_b_block(proj, _rho_ac_matrix(p, th))
    return validate_state(m, (2, 2, 2), ABC)


def purification6(params: FamilyParams, literal: bool = False) -> Ket:
    """Six-qubit pure state on (a, b, c, a', b', c') reducing to the family state.

    Branch i (b = b' = i) is sqrt(1-p_i)|00>_ac|i0>_a'c' + sqrt(p_i)|psi_i>_ac|i1>_a'c'.
    With ``literal`` the second branch uses the printed coefficient
    pattern instead: sqrt(p_2) on |00> and sqrt(1-p_2) on |psi_2>.  That vector
    is normalized but does not reduce to ``counterexample(params)`` unless p_2 = 1/2.
    """
    amps = np.zeros((2,) * 6, dtype=complex)  # axes a, b, c, a', b', c'
    branches = ((params.p1, params.theta1), (params.p2, params.theta2))
    for i, (p, th) in enumerate(branches):
        w00, wpsi = math.sqrt(1.0 - p), math.sqrt(p)
        if literal and i == 1:
            w00, wpsi = wpsi, w00
        psi = _psi_theta(th).reshape(2, 2)
        amps[0, i, 0, i, i, 0] += w00
        amps[:, i, :, i, i, 1] += wpsi * psi
    amps /= math.sqrt(2.0)
    vec = amps.reshape(-1)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-12:
        raise ValidationError(f"purification norm {norm!r}")
    return Ket(vec, (2,) * 6, PURIFICATION_LABELS)


def reduce_purification(psi: Ket) -> QState:
    return partial_trace(psi.density(), ABC)


# named states -------------------------------------------------------------

def _ket_state(vec, labels) -> QState:
    k = Ket(np.asarray(vec, dtype=complex) / np.linalg.norm(vec), (2,) * len(labels), labels)
    return k.density()


def named_ket(name: str) -> Ket:
    key = name.lower()
    if key == "ghz":
        v = np.zeros(8, dtype=complex)
        v[0] = v[7] = 1 / math.sqrt(2)
        return Ket(v, (2, 2, 2), ABC)
    if key == "w":
        v = np.zeros(8, dtype=complex)
        v[[1, 2, 4]] = 1 / math.sqrt(3)
        return Ket(v, (2, 2, 2), ABC)
    if key in ("bell", "phi+"):
        v = np.zeros(4, dtype=complex)
        v[0] = v[3] = 1 / math.sqrt(2)
        return Ket(v, (2, 2), ("a", "b"))
    if key.startswith("product") and set(key[7:]) <= {"0", "1"} and 1 <= len(key[7:]) <= 6:
        bits = key[7:]
        v = np.zeros(2 ** len(bits), dtype=complex)
        v[int(bits, 2)] = 1.0
        return Ket(v, (2,) * len(bits), tuple("abcdef"[: len(bits)]))
    raise UnknownName(f"no pure named state {name!r}")


NAMED_STATES = {
    "ghz": "(|000> + |111>)/sqrt2 on (a, b, c)",
    "w": "(|001> + |010> + |100>)/sqrt3 on (a, b, c)",
    "bell": "(|00> + |11>)/sqrt2 on (a, b); alias phi+",
    "werner:w": "w |Phi+><Phi+| + (1 - w) I/4 on (a, b), w in [0, 1]",
    "productXYZ": "computational product state, e.g. product00, product000",
    "counterexample:p1,t1,p2,t2": "the classical-b family; angles accept pi-expressions like 3pi/10",
}


def werner(w: float) -> QState:
    if not (0.0 <= w <= 1.0):
        raise InvalidParams(f"Werner weight {w!r} outside [0, 1]")
    bell = named_ket("bell").density().matrix
    return validate_state(w * bell + (1 - w) * np.eye(4) / 4, (2, 2), ("a", "b"))


def named_state(name: str, *params: float) -> QState:
    key = name.lower()
    if key == "werner":
        if len(params) != 1:
            raise InvalidParams("werner takes exactly one weight")
        return werner(params[0])
    if key == "counterexample":
        if len(params) != 4:
            raise InvalidParams("counterexample takes p1, theta1, p2, theta2")
        return counterexample(FamilyParams(*params))
    if params:
        raise InvalidParams(f"{name!r} takes no parameters")
    return named_ket(key).density()


# random states --------------------------------------------------------------

@dataclass(frozen=True)
class RandomSpec:
    seed: int
    count: int
    kind: str = "haar_pure3"  # or "mixed_rank"
    rank: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise InvalidParams("count must be >= 1")
        if self.kind not in ("haar_pure3", "mixed_rank"):
            raise InvalidParams(f"unknown random kind {self.kind!r}")
        if not (1 <= self.rank <= 8):
            raise InvalidParams(f"rank {self.rank} outside [1, 8]")


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for sample ``index`` under ``seed``."""
    key = ((index & (2**64 - 1)) << 64) | (seed & (2**64 - 1))
    return np.random.Generator(np.random.Philox(key=key))


def haar_ket3(seed: int, index: int) -> Ket:
    rng = sample_rng(seed, index)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    return Ket(v / np.linalg.norm(v), (2, 2, 2), ABC)


def mixed_rank3(seed: int, index: int, rank: int) -> QState:
    """Three-qubit marginal of a Haar pure state on (a, b, c) ⊗ C^rank."""
    rng = sample_rng(seed, index)
    v = rng.standard_normal(8 * rank) + 1j * rng.standard_normal(8 * rank)
    v = (v / np.linalg.norm(v)).reshape(8, rank)
    return validate_state(v @ v.conj().T, (2, 2, 2), ABC)


def random_states(spec: RandomSpec) -> list:
    if spec.kind == "haar_pure3":
        return [haar_ket3(spec.seed, i) for i in range(spec.count)]
    return [mixed_rank3(spec.seed, i, spec.rank) for i in range(spec.count)]


def random_family_params(seed: int, index: int) -> FamilyParams:
    rng = sample_rng(seed, index)
    p1, p2 = rng.random(2)
    t1, t2 = rng.random(2) * (math.pi / 2)
    return FamilyParams(float(p1), float(t1), float(p2), float(t2))


# state files ----------------------------------------------------------------

def state_to_json(s: QState) -> dict:
    return {
        "dims": list(s.dims),
        "labels": list(s.labels),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in s.matrix],
    }


def state_from_json(obj) -> QState:
    try:
        dims = [int(d) for d in obj["dims"]]
        labels = [str(x) for x in obj["labels"]]
        rows = obj["matrix"]
        side = math.prod(dims) if dims else 0
        if not dims or any(d < 2 for d in dims) or len(labels) != len(dims):
            raise ParseError(f"bad dims/labels: {dims} / {labels}")
        if len(rows) != side or any(len(r) != side for r in rows):
            raise ParseError(f"matrix is not {side}x{side}")
        m = np.empty((side, side), dtype=complex)
        for i, row in enumerate(rows):
            for j, pair in enumerate(row):
                if len(pair) != 2:
                    raise ParseError(f"entry ({i},{j}) is not a [re, im] pair")
                m[i, j] = complex(float(pair[0]), float(pair[1]))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed state file: {exc}") from exc
    return validate_state(m, dims, labels)


def save_state(s: QState, path) -> None:
    try:
        Path(path).write_text(json.dumps(state_to_json(s)), encoding="utf-8")
    except OSError as exc:
        raise StateIOError(str(exc)) from exc


def load_state(path) -> QState:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StateIOError(str(exc)) from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return state_from_json(obj)
