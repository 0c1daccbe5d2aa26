"""Two-party correlation measures.

Mutual information, one-sided (Henderson-Vedral) classical correlation and
quantum discord under rank-1 projective measurements on a single qubit,
Wootters concurrence and entanglement of formation.  The measured side is
always an explicit argument.

The measurement optimizer writes the post-measurement blocks in the Pauli
basis of the measured qubit: measuring with projectors (I ± n.sigma)/2 leaves
the rest of the system in the unnormalized states (rho_rest ± sum_k n_k T_k)/2
with T_k = Tr_m[(sigma_k ⊗ I) rho].  For a qubit remainder the conditional
entropy then has a closed form in n, which keeps the coarse grid vectorized
and the simplex refinement cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import cos, log2, sin, sqrt

import numpy as np

from . import _kernels, qmat
from .errors import NotNormalized, OptimizerFailure, UnknownLabel, ValidationError, WrongArity
from .optimize import nelder_mead
from .qmat import Ket, QState, binary_entropy, partial_trace, von_neumann_entropy

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
SIGMA_YY = np.kron(PAULI[1], PAULI[1]).real  # real, symmetric, involutive

BRANCH_EPS = 1e-14
DISCORD_CLAMP = 1e-9

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BlochBasis:
    """Projective qubit measurement {|v><v|, I - |v><v|} with
    |v> = (cos(theta/2), e^{i phi} sin(theta/2))."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi) or not (0.0 <= self.phi < TWO_PI):
            raise ValidationError(f"basis angles out of range: theta={self.theta}, phi={self.phi}")

    @classmethod
    def wrap(cls, theta: float, phi: float) -> "BlochBasis":
        """Canonical angles for an arbitrary (theta, phi) direction."""
        theta = math.fmod(theta, TWO_PI)
        if theta < 0:
            theta += TWO_PI
        if theta > math.pi:
            theta = TWO_PI - theta
            phi += math.pi
        phi = math.fmod(phi, TWO_PI)
        if phi < 0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        return cls(theta, phi)

    @property
    def vector(self) -> np.ndarray:
        return np.array(
            [math.cos(self.theta / 2), complex(math.cos(self.phi), math.sin(self.phi)) * math.sin(self.theta / 2)]
        )

    @property
    def bloch(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vector
        plus = np.outer(v, v.conj())
        return plus, np.eye(2) - plus

    def to_dict(self) -> dict:
        return {"theta": self.theta, "phi": self.phi}


@dataclass(frozen=True)
class OptimizerSettings:
    grid_theta: int = 60
    grid_phi: int = 120
    starts: int = 3
    xtol: float = 1e-8
    max_evals: int = 500


DEFAULT_SETTINGS = OptimizerSettings()
# dense-grid oracle used for replay/verification
DENSE_SETTINGS = OptimizerSettings(grid_theta=721, grid_phi=1441)


def _pair_labels(pair) -> tuple[str, str]:
    if isinstance(pair, str):
        pair = tuple(pair) if len(pair) == 2 and "," not in pair else tuple(pair.split(","))
    pair = tuple(pair)
    if len(pair) != 2 or pair[0] == pair[1]:
        raise ValidationError(f"a pair needs two distinct labels, got {pair!r}")
    return pair


def reduce_to(s: QState, labels) -> QState:
    """Reduced state on ``labels`` in the order given (not the state's order)."""
    labels = tuple(labels)
    for lab in labels:
        s.index(lab)
    r = partial_trace(s, labels)
    return r if r.labels == labels else r.permute(labels)


def _check_qubit(s: QState, label: str) -> int:
    i = s.index(label)
    if s.dims[i] != 2:
        raise WrongArity(f"subsystem {label!r} has dimension {s.dims[i]}; a qubit is required")
    return i


def mutual_information(s: QState, pair=None) -> float:
    """I(x:y) = S(x) + S(y) - S(xy) on the reduced pair (bits)."""
    if pair is None:
        if s.n_parties != 2:
            raise WrongArity("pair required for states with more than two parties")
        pair = s.labels
    x, y = _pair_labels(pair)
    rxy = reduce_to(s, (x, y))
    return (
        von_neumann_entropy(partial_trace(rxy, [x]))
        + von_neumann_entropy(partial_trace(rxy, [y]))
        - von_neumann_entropy(rxy)
    )


def conditional_entropy_after_measurement(s: QState, measured: str, basis: BlochBasis) -> float:
    """Average entropy of the unmeasured part after measuring qubit ``measured``.

    Computed directly from the projectors: p_i = tr[(Pi_i ⊗ I) rho] and
    rho_rest|i = Tr_m[(Pi_i ⊗ I) rho] / p_i.  Outcomes with p_i < 1e-14
    contribute zero.
    """
    m = _check_qubit(s, measured)
    rest = [lab for lab in s.labels if lab != measured]
    if not rest:
        raise WrongArity("nothing left unmeasured")
    total = 0.0
    for proj in basis.projectors():
        op = np.eye(1)
        for i, d in enumerate(s.dims):
            op = np.kron(op, proj if i == m else np.eye(d))
        branch = op @ s.matrix @ op
        p = float(np.trace(branch).real)
        if p < BRANCH_EPS:
            continue
        cond = qmat._reduce(branch, s.dims, [s.index(lab) for lab in rest]) / p
        total += p * von_neumann_entropy(0.5 * (cond + cond.conj().T))
    return total


class _MeasurementProblem:
    """Conditional entropy as a function of the Bloch direction of the measurement."""

    def __init__(self, s: QState, measured: str):
        m = _check_qubit(s, measured)
        rest = [i for i in range(s.n_parties) if i != m]
        d = math.prod(s.dims[i] for i in rest)
        n = s.n_parties
        t = s.matrix.reshape(s.dims + s.dims)
        t = t.transpose([m] + rest + [m + n] + [i + n for i in rest]).reshape(2, d, 2, d)
        blocks = t.transpose(0, 2, 1, 3)  # blocks[i, j] = <i|_m rho |j>_m
        self.d = d
        self.rest_state = blocks[0, 0] + blocks[1, 1]
        # T_k = sum_ij sigma_k[j, i] blocks[i, j]
        self.tk = np.einsum("kji,ijab->kab", np.array(PAULI), blocks)
        self.measured_bloch = np.array([np.trace(tk).real for tk in self.tk])
        if d == 2:
            self.rest_bloch = np.array([np.trace(self.rest_state @ sg).real for sg in PAULI])
            self.corr = np.array([[np.trace(tk @ sg).real for sg in PAULI] for tk in self.tk])
            self._a = tuple(float(v) for v in self.measured_bloch)
            self._s = tuple(float(v) for v in self.rest_bloch)
            self._k = tuple(tuple(float(v) for v in row) for row in self.corr)
            self.a_arr = np.ascontiguousarray(self.measured_bloch, dtype=float)
            self.s_arr = np.ascontiguousarray(self.rest_bloch, dtype=float)
            self.k_arr = np.ascontiguousarray(self.corr, dtype=float)

    def rest_entropy(self) -> float:
        return von_neumann_entropy(self.rest_state)

    # vectorized over directions (N, 3)
    def batch(self, dirs: np.ndarray) -> np.ndarray:
        na = dirs @ self.measured_bloch
        out = np.zeros(dirs.shape[0])
        if self.d == 2:
            kn = dirs @ self.corr  # rows n_k K_kl
            for sign in (1.0, -1.0):
                p = 0.5 * (1.0 + sign * na)
                r = 0.5 * np.linalg.norm(self.rest_bloch + sign * kn, axis=1)
                lam1 = 0.5 * p + 0.5 * r
                lam2 = np.clip(0.5 * p - 0.5 * r, 0.0, None)
                term = _eta(lam1) + _eta(lam2) - _eta(p)
                out += np.where(p < BRANCH_EPS, 0.0, term)
            return out
        tn = np.einsum("nk,kab->nab", dirs, self.tk)
        for sign in (1.0, -1.0):
            mats = 0.5 * (self.rest_state[None] + sign * tn)
            p = 0.5 * (1.0 + sign * na)
            lam = np.clip(np.linalg.eigvalsh(mats), 0.0, None)
            term = _eta(lam).sum(axis=1) - _eta(p)
            out += np.where(p < BRANCH_EPS, 0.0, term)
        return out

    def scalar(self, x) -> float:
        theta, phi = x
        st = sin(theta)
        n0 = st * cos(phi)
        n1 = st * sin(phi)
        n2 = cos(theta)
        if self.d != 2:
            return float(self.batch(np.array([[n0, n1, n2]]))[0])
        a0, a1, a2 = self._a
        s0, s1, s2 = self._s
        (k00, k01, k02), (k10, k11, k12), (k20, k21, k22) = self._k
        na = n0 * a0 + n1 * a1 + n2 * a2
        kn0 = n0 * k00 + n1 * k10 + n2 * k20
        kn1 = n0 * k01 + n1 * k11 + n2 * k21
        kn2 = n0 * k02 + n1 * k12 + n2 * k22
        total = 0.0
        # outcome +
        p = 0.5 + 0.5 * na
        if p >= BRANCH_EPS:
            r = 0.5 * sqrt((s0 + kn0) ** 2 + (s1 + kn1) ** 2 + (s2 + kn2) ** 2)
            lam = 0.5 * (p + r)
            total += p * log2(p) - lam * log2(lam)
            lam = 0.5 * (p - r)
            if lam > 0.0:
                total -= lam * log2(lam)
        # outcome -
        p = 0.5 - 0.5 * na
        if p >= BRANCH_EPS:
            r = 0.5 * sqrt((s0 - kn0) ** 2 + (s1 - kn1) ** 2 + (s2 - kn2) ** 2)
            lam = 0.5 * (p + r)
            total += p * log2(p) - lam * log2(lam)
            lam = 0.5 * (p - r)
            if lam > 0.0:
                total -= lam * log2(lam)
        return total


def _eta(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0.0, x, 1.0)
    return np.where(x > 0.0, -x * np.log2(safe), 0.0)


@lru_cache(maxsize=8)
def _grid(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.arange(n_phi) * (TWO_PI / n_phi)
    dirs = _directions(thetas, phis) if n_theta * n_phi <= 200_000 else None
    for arr in (thetas, phis, dirs):
        if arr is not None:
            arr.setflags(write=False)
    return thetas, phis, dirs


def _directions(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    st = np.sin(th)
    return np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=-1).reshape(-1, 3)


def minimize_conditional_entropy(
    s: QState, measured: str, settings: OptimizerSettings = DEFAULT_SETTINGS
) -> tuple[float, BlochBasis]:
    """Min over projective bases on ``measured`` of the post-measurement conditional entropy.

    Uniform (theta, phi) grid, then Nelder-Mead from the best grid points.
    The result is an upper bound on the true minimum.
    """
    prob = _MeasurementProblem(s, measured)
    return _minimize(prob, settings)


def _grid_values(prob: _MeasurementProblem, thetas, phis, dirs, compiled: bool) -> np.ndarray:
    if dirs is not None:
        return _kernels.grid_values(prob.a_arr, prob.s_arr, prob.k_arr, dirs) if compiled else prob.batch(dirs)
    vals = np.empty(thetas.size * phis.size)
    rows = max(1, 200_000 // phis.size)
    for start in range(0, thetas.size, rows):
        chunk = _directions(thetas[start : start + rows], phis)
        lo = start * phis.size
        if compiled:
            vals[lo : lo + chunk.shape[0]] = _kernels.grid_values(prob.a_arr, prob.s_arr, prob.k_arr, chunk)
        else:
            vals[lo : lo + chunk.shape[0]] = prob.batch(chunk)
    return vals


def _minimize(
    prob: _MeasurementProblem, settings: OptimizerSettings, compiled: bool | None = None
) -> tuple[float, BlochBasis]:
    # compiled kernels exist only for a single-qubit remainder
    if compiled is None:
        compiled = prob.d == 2
    thetas, phis, dirs = _grid(settings.grid_theta, settings.grid_phi)
    vals = _grid_values(prob, thetas, phis, dirs, compiled)
    best = np.argsort(vals, kind="stable")[: settings.starts]

    step = (0.5 * math.pi / max(settings.grid_theta - 1, 1), 0.5 * TWO_PI / settings.grid_phi)
    best_val = math.inf
    best_x = (0.0, 0.0)
    for idx in best:
        i, j = divmod(int(idx), settings.grid_phi)
        x0 = (float(thetas[i]), float(phis[j]))
        if compiled:
            th, ph, fun, _ = _kernels.nelder_mead_2d(
                prob.a_arr, prob.s_arr, prob.k_arr, x0[0], x0[1], step[0], step[1],
                settings.xtol, settings.max_evals,
            )
            res_x, res_fun = (th, ph), fun
        else:
            res = nelder_mead(prob.scalar, x0, step, xtol=settings.xtol, max_evals=settings.max_evals)
            res_x, res_fun = res.x, res.fun
        for v, x in ((float(vals[idx]), x0), (float(res_fun), res_x)):
            if v < best_val:
                best_val, best_x = v, x
    if not math.isfinite(best_val):
        raise OptimizerFailure("conditional-entropy minimization produced a non-finite value")
    return best_val, BlochBasis.wrap(*best_x)


def classical_correlation(
    s: QState, measured: str, settings: OptimizerSettings = DEFAULT_SETTINGS
) -> tuple[float, BlochBasis]:
    """J = S(rest) - min_basis sum_i p_i S(rest | i), measuring qubit ``measured``.

    ``rest`` is every other subsystem of ``s``; for a two-party state this is the
    usual one-sided classical correlation.
    """
    prob = _MeasurementProblem(s, measured)
    h_min, basis = _minimize(prob, settings)
    j = prob.rest_entropy() - h_min
    if j < 0.0:
        if j < -DISCORD_CLAMP:
            raise OptimizerFailure(f"negative classical correlation {j:.3e}")
        j = 0.0
    return j, basis


def _clamp_discord(d: float) -> float:
    if d < 0.0:
        if d < -DISCORD_CLAMP:
            raise OptimizerFailure(f"discord {d:.3e} is negative beyond roundoff")
        return 0.0
    return d


def total_mutual_information(s: QState, measured: str) -> float:
    """I(measured : rest) across the bipartition measured|everything else."""
    rest = [lab for lab in s.labels if lab != measured]
    return (
        von_neumann_entropy(partial_trace(s, [measured]))
        + von_neumann_entropy(partial_trace(s, rest))
        - von_neumann_entropy(s)
    )


def quantum_discord(s: QState, measured: str, settings: OptimizerSettings = DEFAULT_SETTINGS) -> float:
    """D = I - J on the same measured side, clamped at zero within 1e-9."""
    j, _ = classical_correlation(s, measured, settings)
    return _clamp_discord(total_mutual_information(s, measured) - j)


def _require_two_qubits(s: QState) -> None:
    if s.dims != (2, 2):
        raise WrongArity(f"a two-qubit state is required, got dims {s.dims}")


def wootters_lambdas(s: QState) -> np.ndarray:
    """Descending square roots of the eigenvalues of sqrt(rho) rho~ sqrt(rho).

    Evaluated as the singular values of sqrt(rho) sqrt(rho~), with
    sqrt(rho~) = (Y⊗Y) conj(sqrt(rho)) (Y⊗Y); this keeps structurally zero
    values at roundoff size instead of the square root of roundoff.
    """
    _require_two_qubits(s)
    r = qmat.sqrt_psd(s.matrix)
    r_tilde = SIGMA_YY @ r.conj() @ SIGMA_YY
    return np.linalg.svd(r @ r_tilde, compute_uv=False)


def concurrence(s: QState) -> float:
    lam = wootters_lambdas(s)
    return min(1.0, max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3])))


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def entanglement_of_formation(s: QState) -> float:
    return eof_from_concurrence(concurrence(s))


@dataclass(frozen=True)
class PairQuantities:
    pair: tuple[str, str]
    mutual_info: float
    j_measured_first: float
    j_measured_second: float
    d_measured_first: float
    d_measured_second: float
    concurrence: float
    eof: float
    argmin_bases: tuple[BlochBasis, BlochBasis]

    def j(self, side: str) -> float:
        return self.j_measured_first if side == self.pair[0] else self.j_measured_second

    def d(self, side: str) -> float:
        return self.d_measured_first if side == self.pair[0] else self.d_measured_second

    def to_dict(self) -> dict:
        x, y = self.pair
        return {
            "pair": "".join(self.pair),
            "mutual_info": self.mutual_info,
            "j": {x: self.j_measured_first, y: self.j_measured_second},
            "d": {x: self.d_measured_first, y: self.d_measured_second},
            "concurrence": self.concurrence,
            "eof": self.eof,
            "argmin_bases": {x: self.argmin_bases[0].to_dict(), y: self.argmin_bases[1].to_dict()},
        }


def pair_quantities(s: QState, pair=None, settings: OptimizerSettings = DEFAULT_SETTINGS) -> PairQuantities:
    if pair is None:
        pair = s.labels
    x, y = _pair_labels(pair)
    rxy = reduce_to(s, (x, y))
    _require_two_qubits(rxy)
    mi = mutual_information(rxy)
    jx, bx = classical_correlation(rxy, x, settings)
    jy, by = classical_correlation(rxy, y, settings)
    c = concurrence(rxy)
    return PairQuantities(
        pair=(x, y),
        mutual_info=mi,
        j_measured_first=jx,
        j_measured_second=jy,
        d_measured_first=_clamp_discord(mi - jx),
        d_measured_second=_clamp_discord(mi - jy),
        concurrence=c,
        eof=eof_from_concurrence(c),
        argmin_bases=(bx, by),
    )


def koashi_winter_residual(psi: Ket, pair=("a", "b"), settings: OptimizerSettings = DEFAULT_SETTINGS) -> float:
    """D(rho_xy | measure x) - [S(x) - S(z) + E(rho_yz)] for a pure three-qubit state.

    Vanishes identically for pure states; a nonzero value measures optimizer error
    against the concurrence route.
    """
    if psi.dims != (2, 2, 2):
        raise WrongArity(f"a three-qubit ket is required, got dims {psi.dims}")
    if abs(psi.norm - 1.0) > qmat.TRACE_TOL:
        raise NotNormalized("ket is not normalized")
    x, y = _pair_labels(pair)
    rest = [lab for lab in psi.labels if lab not in (x, y)]
    if len(rest) != 1:
        raise UnknownLabel(f"pair {pair!r} not in {psi.labels}")
    z = rest[0]
    rho = psi.density()
    rxy = reduce_to(rho, (x, y))
    d = quantum_discord(rxy, x, settings)
    sx = von_neumann_entropy(partial_trace(rho, [x]))
    sz = von_neumann_entropy(partial_trace(rho, [z]))
    e = entanglement_of_formation(reduce_to(rho, (y, z)))
    return d - (sx - sz + e)
