import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcorr.errors import NotNormalized, UnknownLabel, WrongArity
from qcorr.pairwise import (
    DEFAULT_SETTINGS,
    BlochBasis,
    _MeasurementProblem,
    _minimize,
    classical_correlation,
    concurrence,
    conditional_entropy_after_measurement,
    entanglement_of_formation,
    eof_from_concurrence,
    koashi_winter_residual,
    mutual_information,
    pair_quantities,
    quantum_discord,
    reduce_to,
)
from qcorr.qmat import Ket, binary_entropy, kron, partial_trace, validate_state, von_neumann_entropy
from qcorr.states import PRINTED_POINT, FamilyParams, counterexample, haar_ket3, named_ket, named_state, rho_ac
from qcorr.tripartite import family_oracles

from conftest import random_density, random_unitary

BELL = named_state("bell")
CLASSICAL = validate_state(np.diag([0.5, 0, 0, 0.5]), [2, 2], ["a", "b"])


def product(rng):
    return validate_state(kron(random_density(rng, 1).matrix, random_density(rng, 1).matrix), [2, 2], ["a", "b"])


def test_bloch_basis_projectors():
    for th, ph in [(0.0, 0.0), (1.1, 4.0), (math.pi, 0.3)]:
        p, m = BlochBasis(th, ph).projectors()
        assert np.allclose(p + m, np.eye(2), atol=1e-15)
        assert np.allclose(p @ p, p, atol=1e-15)
        assert np.allclose(m @ m, m, atol=1e-15)
    with pytest.raises(ValueError):
        BlochBasis(4.0, 0.0)
    with pytest.raises(ValueError):
        BlochBasis(1.0, 2 * math.pi)


def test_mutual_information_examples(rng):
    assert abs(mutual_information(product(rng))) <= 1e-12
    assert mutual_information(BELL) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(UnknownLabel):
        mutual_information(named_state("ghz"), ("a", "q"))


def test_mutual_information_family_oracle():
    s = counterexample(PRINTED_POINT)
    assert abs(mutual_information(s, ("a", "b")) - family_oracles(PRINTED_POINT)["I_ab"]) <= 1e-12


def test_conditional_entropy_examples(rng):
    for th, ph in [(0.3, 1.0), (2.0, 5.0)]:
        assert abs(conditional_entropy_after_measurement(BELL, "a", BlochBasis(th, ph))) <= 1e-12
    s = product(rng)
    h = conditional_entropy_after_measurement(s, "b", BlochBasis(0.7, 2.1))
    assert h == pytest.approx(von_neumann_entropy(partial_trace(s, ["a"])), abs=1e-12)
    assert abs(conditional_entropy_after_measurement(CLASSICAL, "b", BlochBasis(0.0, 0.0))) <= 1e-15


@given(st.integers(0, 2**32 - 1), st.floats(0, math.pi), st.floats(0, 2 * math.pi, exclude_max=True))
def test_closed_form_matches_projector_route(seed, theta, phi):
    s = random_density(np.random.default_rng(seed), 2)
    basis = BlochBasis(theta, phi)
    for side in ("a", "b"):
        prob = _MeasurementProblem(s, side)
        generic = conditional_entropy_after_measurement(s, side, basis)
        assert abs(prob.scalar((theta, phi)) - generic) <= 1e-12
        assert abs(float(prob.batch(basis.bloch[None, :])[0]) - generic) <= 1e-12


def test_compiled_and_python_optimizers_agree(rng):
    for _ in range(6):
        s = random_density(rng, 2, rank=2)
        for side in ("a", "b"):
            prob = _MeasurementProblem(s, side)
            v_c, b_c = _minimize(prob, DEFAULT_SETTINGS, compiled=True)
            v_p, b_p = _minimize(prob, DEFAULT_SETTINGS, compiled=False)
            assert abs(v_c - v_p) <= 1e-12
            assert abs(b_c.theta - b_p.theta) <= 1e-9


def test_classical_correlation_examples(rng):
    j, _ = classical_correlation(product(rng), "a")
    assert abs(j) <= 1e-9
    for side in ("a", "b"):
        assert classical_correlation(BELL, side)[0] == pytest.approx(1.0, abs=1e-9)
    rab = reduce_to(counterexample(PRINTED_POINT), ("a", "b"))
    assert abs(classical_correlation(rab, "b")[0] - mutual_information(rab)) <= 1e-6


def test_discord_examples():
    rab = reduce_to(counterexample(PRINTED_POINT), ("a", "b"))
    assert quantum_discord(rab, "b") <= 1e-6
    assert quantum_discord(BELL, "a") == pytest.approx(1.0, abs=1e-9)
    for side in ("a", "b"):
        assert quantum_discord(CLASSICAL, side) <= 1e-9


def test_concurrence_and_eof_examples(rng):
    assert concurrence(BELL) == pytest.approx(1.0, abs=1e-12)
    assert entanglement_of_formation(BELL) == pytest.approx(1.0, abs=1e-12)
    assert concurrence(product(rng)) <= 1e-12
    assert entanglement_of_formation(CLASSICAL) == 0.0
    ac = reduce_to(counterexample(PRINTED_POINT), ("a", "c"))
    expected = 0.5 * (0.1 * math.sin(3 * math.pi / 5) + 0.7 * math.sin(2 * math.pi / 5))
    assert abs(concurrence(ac) - expected) <= 1e-10
    w = named_state("werner", 0.8)
    assert concurrence(w) == pytest.approx(0.7, abs=1e-12)
    assert entanglement_of_formation(w) == pytest.approx(
        binary_entropy(0.5 * (1 + math.sqrt(1 - 0.49))), abs=1e-12)


def test_concurrence_requires_two_qubits():
    with pytest.raises(WrongArity):
        concurrence(named_state("ghz"))


def test_koashi_winter_examples():
    assert abs(koashi_winter_residual(named_ket("ghz"))) <= 1e-4
    assert abs(koashi_winter_residual(named_ket("product000"))) <= 1e-12
    with pytest.raises(NotNormalized):
        koashi_winter_residual(Ket(np.ones(8) / 2.0, (2, 2, 2), ("a", "b", "c")))


@given(st.integers(0, 2**32 - 1))
def test_pair_quantity_invariants(seed):
    s = random_density(np.random.default_rng(seed), 2, rank=seed % 4 + 1)
    q = pair_quantities(s)
    for side in s.labels:
        assert -1e-12 <= q.j(side) <= q.mutual_info + 1e-9
        raw = q.mutual_info - q.j(side)
        assert q.d(side) == (raw if raw >= 0.0 else 0.0)
    assert 0.0 <= q.concurrence <= 1.0
    assert q.eof == eof_from_concurrence(q.concurrence)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_classical_quantum_states_have_zero_discord(seed, n_branches):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, 2)
    q = rng.dirichlet(np.ones(n_branches))
    m = np.zeros((4, 4), dtype=complex)
    for i in range(n_branches):
        k = u[:, i % 2]
        m += q[i] * kron(np.outer(k, k.conj()), random_density(rng, 1).matrix)
    s = validate_state(m, [2, 2], ["m", "r"])
    assert quantum_discord(s, "m") <= 1e-6


@given(st.integers(0, 2**32 - 1))
def test_local_unitary_invariance_on_measured_side(seed):
    rng = np.random.default_rng(seed)
    s = random_density(rng, 2, rank=2)
    u = kron(random_unitary(rng, 2), np.eye(2))
    t = validate_state(u @ s.matrix @ u.conj().T, [2, 2], ["a", "b"])
    j_s, _ = classical_correlation(s, "a")
    j_t, _ = classical_correlation(t, "a")
    assert abs(j_s - j_t) <= 1e-6
    assert abs(quantum_discord(s, "a") - quantum_discord(t, "a")) <= 1e-6


@given(st.floats(0, 1), st.floats(0, math.pi / 2), st.floats(0, 1), st.floats(0, math.pi / 2))
def test_family_entanglement_implies_two_sided_discord(p1, t1, p2, t2):
    params = FamilyParams(p1, t1, p2, t2)
    ac = reduce_to(counterexample(params), ("a", "c"))
    c = concurrence(ac)
    assert abs(c - family_oracles(params)["C_ac"]) <= 1e-10
    if c > 1e-3:
        assert quantum_discord(ac, "a") > 0 and quantum_discord(ac, "c") > 0


def test_rho_ac_separable_mixture_has_zero_concurrence():
    assert concurrence(rho_ac(0.0, 0.3)) == 0.0
    sep = validate_state(0.5 * np.diag([1, 0, 0, 0]) + 0.5 * np.diag([0, 0, 0, 1]), [2, 2])
    assert concurrence(sep) <= 1e-12


def test_koashi_winter_random_states():
    worst = max(abs(koashi_winter_residual(haar_ket3(3, i), ("a", "b"))) for i in range(20))
    assert worst <= 1e-4
