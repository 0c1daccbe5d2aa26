"""Tripartite correlation bookkeeping.

Total information T = S(a) + S(b) + S(c) - S(abc), the pairwise maximum T2 and
the genuine part T3 = T - T2; the pairwise classical/quantum maxima J2 and D2
under an explicit measurement-side policy; and the two candidate splits of the
genuine correlations:

* cut split: T3 is the mutual information across (argmax pair)|(singleton) and
  is divided into a classical part (singleton measured) and the remainder;
* subtractive split: J3 = J - J2 and D3 = D - D2, whose sum telescopes to
  T - J2 - D2 regardless of how the tripartite totals J and D are defined.

The gap between the two sums is J2 + D2 - T2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ConventionRequired, InvalidParams, InvariantViolation, UnknownName, WrongArity
from .pairwise import (
    DEFAULT_SETTINGS,
    OptimizerSettings,
    PairQuantities,
    _clamp_discord,
    classical_correlation,
    concurrence,
    eof_from_concurrence,
    reduce_to,
)
from .qmat import QState, binary_entropy, partial_trace, von_neumann_entropy
from .states import FamilyParams, counterexample

ZERO_DISCORD_TOL = 1e-6
POSITIVE_GAP_TOL = 1e-3
CONCURRENCE_EPS = 1e-12
REPORTED_VALUE_TOL = 0.02
ROUTE_TOL = 1e-9
GAP_ROUTE_TOL = 1e-12

CONV_SINGLETON = "conv-singleton"
CONVENTIONS = (CONV_SINGLETON,)

# values printed for the family at (0.1, 3pi/10, 0.7, pi/5)
REPORTED_VALUES = {"I_ab": 0.27, "I_ac": 0.22, "I_bc": 0.01, "E_ac": 0.11}

_RULES = ("first", "second", "min", "max")


@dataclass(frozen=True)
class SidePolicy:
    """Which side of each pair is measured when resolving J and D.

    ``min``/``max`` pick the side with the smaller/larger discord (equivalently
    larger/smaller J); the first side wins ties.  An explicit policy maps each
    pair ("ab", "ac", "bc") to a label or to one of the generic rules.
    """

    kind: str
    mapping: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.kind not in _RULES + ("explicit",):
            raise UnknownName(f"unknown side policy {self.kind!r}")
        if self.kind != "explicit" and self.mapping:
            raise InvalidParams("only explicit policies carry a pair map")

    @classmethod
    def explicit(cls, mapping: Mapping[str, str]) -> "SidePolicy":
        items = []
        for pair, rule in mapping.items():
            pair = "".join(sorted(pair.replace(",", "")))
            if len(pair) != 2:
                raise InvalidParams(f"bad pair key {pair!r}")
            if rule not in _RULES and rule not in pair:
                raise InvalidParams(f"rule {rule!r} for pair {pair!r} names neither side")
            items.append((pair, rule))
        return cls("explicit", tuple(sorted(items)))

    @classmethod
    def parse(cls, text: str) -> "SidePolicy":
        key = text.strip().lower()
        aliases = {
            "first": "first", "measure-first": "first", "measurefirst": "first",
            "second": "second", "measure-second": "second", "measuresecond": "second",
            "min": "min", "min-over-sides": "min", "minoversides": "min",
            "max": "max", "max-over-sides": "max", "maxoversides": "max",
        }
        if key in aliases:
            return cls(aliases[key])
        if key == "reproduction":
            return REPRODUCTION_POLICY
        if "=" in key:
            mapping = {}
            for item in key.split(","):
                pair, _, rule = item.partition("=")
                mapping[pair.strip()] = rule.strip()
            return cls.explicit(mapping)
        raise UnknownName(f"unknown side policy {text!r}")

    def rule_for(self, pair: tuple[str, str]) -> str:
        if self.kind != "explicit":
            return self.kind
        key = "".join(sorted(pair))
        for k, rule in self.mapping:
            if k == key:
                return rule
        raise InvalidParams(f"explicit policy has no side for pair {key!r}")

    @property
    def name(self) -> str:
        if self.kind != "explicit":
            return self.kind
        return ",".join(f"{k}={r}" for k, r in self.mapping)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "map": dict(self.mapping)}


MEASURE_FIRST = SidePolicy("first")
MEASURE_SECOND = SidePolicy("second")
MIN_OVER_SIDES = SidePolicy("min")
MAX_OVER_SIDES = SidePolicy("max")
REPRODUCTION_POLICY = SidePolicy.explicit({"ab": "b", "bc": "b", "ac": "min"})
BUILTIN_POLICIES = (MEASURE_FIRST, MEASURE_SECOND, MIN_OVER_SIDES, MAX_OVER_SIDES, REPRODUCTION_POLICY)


@dataclass(frozen=True)
class PairResolution:
    pair: tuple[str, str]
    rule: str
    side: str
    j: float
    d: float

    def to_dict(self) -> dict:
        return {"pair": "".join(self.pair), "rule": self.rule, "measured": self.side, "j": self.j, "d": self.d}


class _Pair:
    """Lazily evaluated quantities of one reduced pair."""

    def __init__(self, rho: QState, settings: OptimizerSettings, entropies: dict):
        self.rho = rho
        self.pair = rho.labels
        self.settings = settings
        x, y = self.pair
        self.mutual_info = entropies[x] + entropies[y] - von_neumann_entropy(rho)
        self._j: dict[str, tuple[float, object]] = {}
        self._c: float | None = None

    def j(self, side: str) -> float:
        if side not in self._j:
            self._j[side] = classical_correlation(self.rho, side, self.settings)
        return self._j[side][0]

    def basis(self, side: str):
        self.j(side)
        return self._j[side][1]

    def d(self, side: str) -> float:
        return _clamp_discord(self.mutual_info - self.j(side))

    @property
    def concurrence(self) -> float:
        if self._c is None:
            self._c = concurrence(self.rho)
        return self._c

    def resolve(self, rule: str) -> PairResolution:
        x, y = self.pair
        if rule == "first":
            side = x
        elif rule == "second":
            side = y
        elif rule in ("min", "max"):
            dx, dy = self.d(x), self.d(y)
            if rule == "min":
                side = y if dy < dx else x
            else:
                side = y if dy > dx else x
        else:
            side = rule
        return PairResolution(self.pair, rule, side, self.j(side), self.d(side))

    def quantities(self) -> PairQuantities:
        x, y = self.pair
        c = self.concurrence
        return PairQuantities(
            pair=self.pair,
            mutual_info=self.mutual_info,
            j_measured_first=self.j(x),
            j_measured_second=self.j(y),
            d_measured_first=self.d(x),
            d_measured_second=self.d(y),
            concurrence=c,
            eof=eof_from_concurrence(c),
            argmin_bases=(self.basis(x), self.basis(y)),
        )


def _argmax(values: list[float]) -> int:
    # first maximum wins
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


class TripartiteAnalysis:
    """Cached evaluation of every tripartite quantity for one three-qubit state."""

    def __init__(self, s: QState, settings: OptimizerSettings = DEFAULT_SETTINGS):
        if s.n_parties != 3:
            raise WrongArity(f"a tripartite state is required, got {s.n_parties} parties")
        if s.dims != (2, 2, 2):
            raise WrongArity(f"three qubits are required, got dims {s.dims}")
        self.state = s
        self.settings = settings
        la, lb, lc = s.labels
        self.pairs_order = ((la, lb), (la, lc), (lb, lc))
        self.entropy = {lab: von_neumann_entropy(partial_trace(s, [lab])) for lab in s.labels}
        self.entropy_total = von_neumann_entropy(s)
        self._pairs: dict[tuple[str, str], _Pair] = {}
        self._cut_j: tuple[float, object] | None = None

    def pair(self, pair) -> _Pair:
        pair = tuple(pair)
        if pair not in self._pairs:
            if pair not in self.pairs_order:
                raise InvalidParams(f"pair {pair} is not one of {self.pairs_order}")
            self._pairs[pair] = _Pair(reduce_to(self.state, pair), self.settings, self.entropy)
        return self._pairs[pair]

    # totals ----------------------------------------------------------------
    @property
    def total_information(self) -> float:
        return sum(self.entropy.values()) - self.entropy_total

    def t2(self) -> tuple[float, tuple[str, str]]:
        mis = [self.pair(p).mutual_info for p in self.pairs_order]
        k = _argmax(mis)
        return mis[k], self.pairs_order[k]

    def t3(self) -> float:
        t2, pair = self.t2()
        t3 = self.total_information - t2
        cut = self.cut_mutual_information(pair)
        if abs(cut - t3) > ROUTE_TOL:
            raise InvariantViolation(f"T - T2 = {t3!r} but I(pair : rest) = {cut!r}")
        return t3

    def singleton(self, pair) -> str:
        return next(lab for lab in self.state.labels if lab not in pair)

    def cut_mutual_information(self, pair) -> float:
        z = self.singleton(pair)
        s_pair = von_neumann_entropy(self.pair(pair).rho)
        return s_pair + self.entropy[z] - self.entropy_total

    # pairwise aggregation -------------------------------------------------------
    def resolutions(self, policy: SidePolicy) -> list[PairResolution]:
        return [self.pair(p).resolve(policy.rule_for(p)) for p in self.pairs_order]

    def j2_d2(self, policy: SidePolicy):
        res = self.resolutions(policy)
        kj = _argmax([r.j for r in res])
        kd = _argmax([r.d for r in res])
        return res[kj].j, res[kj].pair, res[kd].d, res[kd].pair, res

    # the two definitions ----------------------------------------------------------
    def def1(self, split: bool = True):
        """(T3, J3', D3') with the singleton of the argmax pair measured."""
        total = self.t3()
        if not split:
            return total, None, None
        _, pair = self.t2()
        j, _ = self.cut_classical_correlation(pair)
        return total, j, total - j

    def cut_classical_correlation(self, pair):
        if self._cut_j is None or self._cut_j[2] != tuple(pair):
            j, basis = classical_correlation(self.state, self.singleton(pair), self.settings)
            self._cut_j = (j, basis, tuple(pair))
        return self._cut_j[0], self._cut_j[1]

    def def2_sum(self, policy: SidePolicy) -> float:
        j2, _, d2, _, _ = self.j2_d2(policy)
        return self.total_information - j2 - d2

    def def2_split(self, policy: SidePolicy, convention: str | None):
        if convention is None:
            raise ConventionRequired(
                "the subtractive split needs a convention for the tripartite totals; "
                f"choose one of {CONVENTIONS}"
            )
        if convention.lower() != CONV_SINGLETON:
            raise UnknownName(f"unknown convention {convention!r}; choose one of {CONVENTIONS}")
        j2, _, d2, _, _ = self.j2_d2(policy)
        _, pair = self.t2()
        j_total, _ = self.cut_classical_correlation(pair)
        d_total = self.total_information - j_total
        return j_total - j2, d_total - d2

    def gap_delta(self, policy: SidePolicy) -> float:
        t2, _ = self.t2()
        j2, _, d2, _, _ = self.j2_d2(policy)
        gap = j2 + d2 - t2
        other = self.t3() - self.def2_sum(policy)
        if abs(other - gap) > GAP_ROUTE_TOL:
            raise InvariantViolation(f"gap routes disagree: {gap!r} vs {other!r}")
        return gap

    def report(self, policy: SidePolicy, convention: str | None = None, split: bool = True) -> "TripartiteReport":
        t2, t2_pair = self.t2()
        j2, j2_pair, d2, d2_pair, res = self.j2_d2(policy)
        def1_total, j3p, d3p = self.def1(split)
        d2sum = self.def2_sum(policy)
        split2 = self.def2_split(policy, convention) if convention is not None else None
        return TripartiteReport(
            labels=self.state.labels,
            total_information=self.total_information,
            pairwise=tuple(self.pair(p).quantities() for p in self.pairs_order),
            t2=t2,
            t2_pair=t2_pair,
            t3=self.t3(),
            j2=j2,
            j2_pair=j2_pair,
            d2=d2,
            d2_pair=d2_pair,
            def1_total=def1_total,
            def1_split=None if j3p is None else (j3p, d3p),
            def2_sum=d2sum,
            def2_split=split2,
            convention=convention.lower() if convention else None,
            gap_delta=self.gap_delta(policy),
            policy=policy,
            resolutions=tuple(res),
        )


@dataclass(frozen=True)
class TripartiteReport:
    labels: tuple[str, ...]
    total_information: float
    pairwise: tuple[PairQuantities, ...]
    t2: float
    t2_pair: tuple[str, str]
    t3: float
    j2: float
    j2_pair: tuple[str, str]
    d2: float
    d2_pair: tuple[str, str]
    def1_total: float
    def1_split: tuple[float, float] | None
    def2_sum: float
    def2_split: tuple[float, float] | None
    convention: str | None
    gap_delta: float
    policy: SidePolicy
    resolutions: tuple[PairResolution, ...]
    base: str = "bits"

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "base": self.base,
            "policy": self.policy.to_dict(),
            "total_information": self.total_information,
            "pairwise": [q.to_dict() for q in self.pairwise],
            "resolutions": [r.to_dict() for r in self.resolutions],
            "t2": {"value": self.t2, "pair": "".join(self.t2_pair)},
            "t3": self.t3,
            "j2": {"value": self.j2, "pair": "".join(self.j2_pair)},
            "d2": {"value": self.d2, "pair": "".join(self.d2_pair)},
            "def1": {
                "total": self.def1_total,
                "split": None if self.def1_split is None else dict(zip(("J3", "D3"), self.def1_split)),
            },
            "def2": {
                "sum": self.def2_sum,
                "split": None if self.def2_split is None else dict(zip(("J3", "D3"), self.def2_split)),
                "convention": self.convention,
            },
            "gap_delta": self.gap_delta,
        }


# module-level operations --------------------------------------------------------

def total_information(s: QState) -> float:
    return TripartiteAnalysis(s).total_information


def t2(s: QState) -> tuple[float, tuple[str, str]]:
    return TripartiteAnalysis(s).t2()


def t3(s: QState) -> float:
    return TripartiteAnalysis(s).t3()


def j2_d2(s: QState, policy: SidePolicy, settings: OptimizerSettings = DEFAULT_SETTINGS):
    """(J2, J2 pair, D2, D2 pair, per-pair resolutions)."""
    return TripartiteAnalysis(s, settings).j2_d2(policy)


def def1(s: QState, split: bool = True, settings: OptimizerSettings = DEFAULT_SETTINGS):
    return TripartiteAnalysis(s, settings).def1(split)


def def2_sum(s: QState, policy: SidePolicy, settings: OptimizerSettings = DEFAULT_SETTINGS) -> float:
    return TripartiteAnalysis(s, settings).def2_sum(policy)


def def2_split(s: QState, policy: SidePolicy, convention: str | None, settings: OptimizerSettings = DEFAULT_SETTINGS):
    return TripartiteAnalysis(s, settings).def2_split(policy, convention)


def gap_delta(s: QState, policy: SidePolicy, settings: OptimizerSettings = DEFAULT_SETTINGS) -> float:
    return TripartiteAnalysis(s, settings).gap_delta(policy)


def tripartite_report(
    s: QState,
    policy: SidePolicy,
    convention: str | None = None,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
) -> TripartiteReport:
    return TripartiteAnalysis(s, settings).report(policy, convention)


# the counterexample claim chain ---------------------------------------------------

def family_oracles(params: FamilyParams) -> dict:
    """Closed forms for the family: I(a:b) from the diagonal reduction and the
    X-state concurrence of rho_ac."""
    x1 = params.p1 * math.cos(params.theta1) ** 2
    x2 = params.p2 * math.cos(params.theta2) ** 2
    i_ab = binary_entropy(0.5 * (x1 + x2)) - 0.5 * (binary_entropy(x1) + binary_entropy(x2))
    c_ac = 0.5 * (params.p1 * math.sin(2 * params.theta1) + params.p2 * math.sin(2 * params.theta2))
    return {"I_ab": i_ab, "C_ac": c_ac}


@dataclass(frozen=True)
class Claim:
    name: str
    holds: bool
    values: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "values": self.values}


@dataclass(frozen=True)
class Discrepancy:
    quantity: str
    computed: float
    reported: float
    tolerance: float = REPORTED_VALUE_TOL

    @property
    def signed(self) -> float:
        return self.computed - self.reported

    @property
    def within_tolerance(self) -> bool:
        return abs(self.signed) <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "computed": self.computed,
            "reported": self.reported,
            "signed_discrepancy": self.signed,
            "tolerance": self.tolerance,
            "within_tolerance": self.within_tolerance,
        }


@dataclass(frozen=True)
class ClaimChainVerdict:
    params: FamilyParams
    policy: SidePolicy
    claims: tuple[Claim, ...]
    values: dict
    oracles: dict
    reported_comparison: tuple[Discrepancy, ...] = field(default=())

    @property
    def overall(self) -> bool:
        return all(c.holds for c in self.claims)

    @property
    def gap(self) -> float:
        return self.values["gap_delta"]

    def claim(self, name: str) -> Claim:
        return next(c for c in self.claims if c.name == name)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "policy": self.policy.to_dict(),
            "overall": self.overall,
            "claims": [c.to_dict() for c in self.claims],
            "values": self.values,
            "oracles": self.oracles,
            "reported_comparison": [d.to_dict() for d in self.reported_comparison],
        }


CLAIM_NAMES = (
    "argmax_pair_is_ab",
    "zero_discord_on_b",
    "ac_entangled_and_discordant",
    "j2_realized_by_ab",
    "d2_realized_by_ac",
    "gap_equals_d2",
)


def claim_chain(
    params: FamilyParams,
    policy: SidePolicy = REPRODUCTION_POLICY,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
    compare_reported: bool = False,
) -> ClaimChainVerdict:
    """Evaluate the six-step disagreement argument at one family point."""
    if not isinstance(params, FamilyParams):
        params = FamilyParams(*params)
    an = TripartiteAnalysis(counterexample(params), settings)
    ab, ac, bc = (an.pair(p) for p in an.pairs_order)
    t2_val, t2_pair = an.t2()
    j2, j2_pair, d2, d2_pair, res = an.j2_d2(policy)
    gap = an.gap_delta(policy)
    d_ab_b, d_bc_b = ab.d("b"), bc.d("b")
    d_ac_a, d_ac_c = ac.d("a"), ac.d("c")
    c_ac = ac.concurrence
    j_ab = res[0].j

    claims = (
        Claim("argmax_pair_is_ab", t2_pair == ("a", "b"), {"t2_pair": "".join(t2_pair), "t2": t2_val}),
        Claim(
            "zero_discord_on_b",
            d_ab_b <= ZERO_DISCORD_TOL and d_bc_b <= ZERO_DISCORD_TOL,
            {"D_ab|b": d_ab_b, "D_bc|b": d_bc_b},
        ),
        Claim(
            "ac_entangled_and_discordant",
            c_ac > CONCURRENCE_EPS and d_ac_a > POSITIVE_GAP_TOL and d_ac_c > POSITIVE_GAP_TOL,
            {"C_ac": c_ac, "D_ac|a": d_ac_a, "D_ac|c": d_ac_c},
        ),
        Claim(
            "j2_realized_by_ab",
            j2_pair == ("a", "b") and abs(j_ab - ab.mutual_info) <= ZERO_DISCORD_TOL,
            {"j2_pair": "".join(j2_pair), "j2": j2, "J_ab": j_ab, "I_ab": ab.mutual_info},
        ),
        Claim("d2_realized_by_ac", d2_pair == ("a", "c"), {"d2_pair": "".join(d2_pair), "d2": d2}),
        Claim(
            "gap_equals_d2",
            abs(gap - d2) <= ZERO_DISCORD_TOL and gap > POSITIVE_GAP_TOL,
            {"gap_delta": gap, "d2": d2},
        ),
    )
    values = {
        "I_ab": ab.mutual_info,
        "I_ac": ac.mutual_info,
        "I_bc": bc.mutual_info,
        "E_ac": eof_from_concurrence(c_ac),
        "C_ac": c_ac,
        "T": an.total_information,
        "t2": t2_val,
        "t3": an.t3(),
        "j2": j2,
        "d2": d2,
        "def2_sum": an.def2_sum(policy),
        "gap_delta": gap,
    }
    oracle = family_oracles(params)
    oracles = {
        "I_ab": {"closed_form": oracle["I_ab"], "computed": ab.mutual_info,
                 "abs_diff": abs(oracle["I_ab"] - ab.mutual_info)},
        "C_ac": {"closed_form": oracle["C_ac"], "computed": c_ac, "abs_diff": abs(oracle["C_ac"] - c_ac)},
    }
    comparison = ()
    if compare_reported:
        comparison = tuple(Discrepancy(k, values[k], v) for k, v in REPORTED_VALUES.items())
    return ClaimChainVerdict(params, policy, claims, values, oracles, comparison)
