"""Bipartite and tripartite correlation measures for few-qubit states."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .qmat import (  # noqa: E402
    Ket,
    QState,
    Spectrum,
    binary_entropy,
    eig_hermitian,
    kron,
    partial_trace,
    sqrt_psd,
    trace_distance,
    validate_state,
    von_neumann_entropy,
)
from .pairwise import (  # noqa: E402
    BlochBasis,
    OptimizerSettings,
    PairQuantities,
    classical_correlation,
    concurrence,
    entanglement_of_formation,
    koashi_winter_residual,
    mutual_information,
    pair_quantities,
    quantum_discord,
)
from .states import FamilyParams, PRINTED_POINT, counterexample, named_state, purification6  # noqa: E402
from .tripartite import (  # noqa: E402
    MAX_OVER_SIDES,
    MEASURE_FIRST,
    MEASURE_SECOND,
    MIN_OVER_SIDES,
    REPRODUCTION_POLICY,
    SidePolicy,
    TripartiteAnalysis,
    TripartiteReport,
    claim_chain,
    gap_delta,
    tripartite_report,
)
from .discovery import SearchSpec, search, verify_point  # noqa: E402
