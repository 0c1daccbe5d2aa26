"""Deterministic searches for points where the two genuine-correlation
definitions disagree.

Work is split by point index and reduced by (value, smallest index), so the
result does not depend on the number of worker processes.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, ReplayMismatch
from .pairwise import DENSE_SETTINGS, OptimizerSettings
from .qmat import QState
from .states import (
    FamilyParams,
    mixed_rank3,
    random_family_params,
    state_from_json,
    state_to_json,
)
from .tripartite import (
    POSITIVE_GAP_TOL,
    REPRODUCTION_POLICY,
    ClaimChainVerdict,
    SidePolicy,
    TripartiteAnalysis,
    claim_chain,
)

MODES = ("family-grid", "family-random", "mixed-random")
OBJECTIVES = ("max-gap", "first-valid")
REPLAY_TOL = 1e-6


@dataclass(frozen=True)
class SearchSpec:
    mode: str = "family-grid"
    steps: int = 9
    samples: int = 1000
    seed: int = 0
    policy: SidePolicy = REPRODUCTION_POLICY
    objective: str = "max-gap"
    workers: int = 1
    rank: int = 1
    canonical_order: bool = True
    p_range: tuple[float, float] = (0.0, 1.0)
    theta_range: tuple[float, float] = (0.0, math.pi / 2)

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidParams(f"mode must be one of {MODES}")
        if self.objective not in OBJECTIVES:
            raise InvalidParams(f"objective must be one of {OBJECTIVES}")
        if self.mode == "family-grid" and self.steps < 2:
            raise InvalidParams("grid needs at least 2 steps per axis")
        if self.mode != "family-grid" and self.samples < 1:
            raise InvalidParams("sample count must be >= 1")
        if self.workers < 1:
            raise InvalidParams("worker count must be >= 1")
        if not (1 <= self.rank <= 8):
            raise InvalidParams("rank must be in [1, 8]")

    @property
    def size(self) -> int:
        return self.steps**4 if self.mode == "family-grid" else self.samples

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "seed": self.seed,
            "policy": self.policy.to_dict(),
            "objective": self.objective,
        }
        if self.mode == "family-grid":
            out.update(steps=self.steps, p_range=list(self.p_range), theta_range=list(self.theta_range))
        else:
            out["samples"] = self.samples
        if self.mode == "mixed-random":
            out.update(rank=self.rank, canonical_order=self.canonical_order)
        return out


def grid_axes(spec: SearchSpec) -> tuple[np.ndarray, np.ndarray]:
    return np.linspace(*spec.p_range, spec.steps), np.linspace(*spec.theta_range, spec.steps)


def grid_point(spec: SearchSpec, index: int) -> FamilyParams:
    """Row-major point ``index`` over the axes (p1, theta1, p2, theta2)."""
    ps, ts = grid_axes(spec)
    n = spec.steps
    i1, rem = divmod(index, n**3)
    j1, rem = divmod(rem, n**2)
    i2, j2 = divmod(rem, n)
    return FamilyParams(float(ps[i1]), float(ts[j1]), float(ps[i2]), float(ts[j2]))


def canonical_relabel(s: QState) -> QState:
    """Reorder the qubits so that I(ab) >= I(ac) >= I(bc) (labels stay a, b, c)."""
    an = TripartiteAnalysis(s)
    for perm in itertools.permutations(s.labels):
        x, y, z = perm
        i_xy, i_xz, i_yz = (an.pair(tuple(sorted(p, key=s.labels.index))).mutual_info
                            for p in ((x, y), (x, z), (y, z)))
        if i_xy >= i_xz >= i_yz:
            return s.permute(perm).relabel(s.labels)
    raise AssertionError("some ordering always exists")


@dataclass(frozen=True)
class SearchPoint:
    index: int
    gap: float
    valid: bool
    params: FamilyParams | None = None
    state: QState | None = None

    def to_dict(self) -> dict:
        out = {"index": self.index, "gap_delta": self.gap, "valid": self.valid}
        if self.params is not None:
            out["params"] = self.params.to_dict()
        if self.state is not None:
            out["state"] = state_to_json(self.state)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "SearchPoint":
        params = FamilyParams(**obj["params"]) if obj.get("params") else None
        state = state_from_json(obj["state"]) if obj.get("state") else None
        return cls(int(obj["index"]), float(obj["gap_delta"]), bool(obj["valid"]), params, state)


@dataclass
class SearchResult:
    spec: SearchSpec
    best: SearchPoint | None
    verdict: ClaimChainVerdict | None
    evaluations: int
    valid_count: int
    max_abs_gap: float
    max_abs_gap_index: int
    violations: list[SearchPoint] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def no_valid_point(self) -> bool:
        return self.best is None

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "no_valid_point": self.no_valid_point,
            "best": None if self.best is None else self.best.to_dict(),
            "verdict": None if self.verdict is None else self.verdict.to_dict(),
            "evaluations": self.evaluations,
            "valid_count": self.valid_count,
            "max_abs_gap": self.max_abs_gap,
            "max_abs_gap_index": self.max_abs_gap_index,
            "violations": [v.to_dict() for v in self.violations],
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


# evaluation (runs in worker processes) ------------------------------------------

def _mixed_state(spec: SearchSpec, index: int) -> QState:
    s = mixed_rank3(spec.seed, index, spec.rank)
    return canonical_relabel(s) if spec.canonical_order else s


def _evaluate(spec: SearchSpec, index: int) -> tuple[int, float, bool]:
    if spec.mode == "mixed-random":
        gap = TripartiteAnalysis(_mixed_state(spec, index)).gap_delta(spec.policy)
        return index, gap, True
    params = grid_point(spec, index) if spec.mode == "family-grid" else random_family_params(spec.seed, index)
    v = claim_chain(params, spec.policy)
    return index, v.gap, v.overall


def _evaluate_range(args) -> list[tuple[int, float, bool]]:
    spec, start, stop = args
    return [_evaluate(spec, i) for i in range(start, stop)]


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(n / (workers * 4)))
    return [(lo, min(n, lo + size)) for lo in range(0, n, size)]


def _run(spec: SearchSpec) -> list[tuple[int, float, bool]]:
    n = spec.size
    if spec.workers == 1:
        return _evaluate_range((spec, 0, n))
    jobs = [(spec, lo, hi) for lo, hi in _chunks(n, spec.workers)]
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        parts = list(pool.map(_evaluate_range, jobs))
    return [r for part in parts for r in part]


def _select(spec: SearchSpec, rows) -> tuple[int, float, bool] | None:
    best = None
    for row in rows:  # rows are in index order
        _, gap, valid = row
        if not valid:
            continue
        if spec.objective == "first-valid":
            return row
        if best is None or gap > best[1]:
            best = row
    return best


def _point(spec: SearchSpec, index: int, gap: float, valid: bool) -> SearchPoint:
    if spec.mode == "mixed-random":
        return SearchPoint(index, gap, valid, state=_mixed_state(spec, index))
    params = grid_point(spec, index) if spec.mode == "family-grid" else random_family_params(spec.seed, index)
    return SearchPoint(index, gap, valid, params=params)


def search(spec: SearchSpec) -> SearchResult:
    t0 = time.perf_counter()
    rows = _run(spec)
    chosen = _select(spec, rows)
    best = verdict = None
    if chosen is not None:
        best = _point(spec, *chosen)
        if best.params is not None:
            verdict = claim_chain(best.params, spec.policy)
    k_abs = max(range(len(rows)), key=lambda k: (abs(rows[k][1]), -k))
    violations = []
    if spec.mode == "mixed-random":
        violations = [_point(spec, *r) for r in rows if abs(r[1]) > POSITIVE_GAP_TOL]
    return SearchResult(
        spec=spec,
        best=best,
        verdict=verdict,
        evaluations=len(rows),
        valid_count=sum(1 for r in rows if r[2]),
        max_abs_gap=abs(rows[k_abs][1]),
        max_abs_gap_index=rows[k_abs][0],
        violations=violations,
        wall_time=time.perf_counter() - t0,
    )


def grid_search(spec: SearchSpec) -> SearchResult:
    if spec.mode != "family-grid":
        raise InvalidParams("grid_search needs mode 'family-grid'")
    return search(spec)


def random_search(spec: SearchSpec) -> SearchResult:
    if spec.mode not in ("family-random", "mixed-random"):
        raise InvalidParams("random_search needs mode 'family-random' or 'mixed-random'")
    return search(spec)


@dataclass(frozen=True)
class MixedReplay:
    gap: float
    stored_gap: float
    policy: SidePolicy

    @property
    def overall(self) -> bool:
        return abs(self.gap) > POSITIVE_GAP_TOL

    def to_dict(self) -> dict:
        return {"gap_delta": self.gap, "stored_gap_delta": self.stored_gap, "policy": self.policy.to_dict()}


def verify_point(
    point: SearchPoint | FamilyParams,
    policy: SidePolicy = REPRODUCTION_POLICY,
    settings: OptimizerSettings = DENSE_SETTINGS,
):
    """Recompute a point with the dense-grid optimizer and check the stored gap.

    Family points return a :class:`ClaimChainVerdict` (with the reported-value
    comparison attached); mixed-state points return a :class:`MixedReplay`.
    """
    if isinstance(point, FamilyParams):
        return claim_chain(point, policy, settings, compare_reported=True)
    if point.params is not None:
        verdict = claim_chain(point.params, policy, settings, compare_reported=True)
        recomputed = verdict.gap
    elif point.state is not None:
        recomputed = TripartiteAnalysis(point.state, settings).gap_delta(policy)
        verdict = MixedReplay(recomputed, point.gap, policy)
    else:
        raise InvalidParams("point carries neither parameters nor a state")
    if abs(recomputed - point.gap) > REPLAY_TOL:
        raise ReplayMismatch(f"stored gap {point.gap!r} vs recomputed {recomputed!r}")
    return verdict


__all__ = [
    "SearchSpec",
    "SearchPoint",
    "SearchResult",
    "MixedReplay",
    "search",
    "grid_search",
    "random_search",
    "verify_point",
    "canonical_relabel",
    "grid_point",
]
