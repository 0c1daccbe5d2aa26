import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcorr.errors import (
    DimensionMismatch,
    EmptyKeepSet,
    HermitianDefectTooLarge,
    NegativeEigenvalue,
    NonSquare,
    NotHermitian,
    OutOfRange,
    TraceNotOne,
    UnknownLabel,
)
from qcorr.qmat import (
    Ket,
    binary_entropy,
    eig_hermitian,
    kron,
    partial_trace,
    sqrt_psd,
    trace_distance,
    validate_state,
    von_neumann_entropy,
)
from qcorr.states import counterexample, PRINTED_POINT, named_state

from conftest import random_density, random_unitary

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])


def test_validate_maximally_mixed():
    s = validate_state(np.eye(2) / 2, [2])
    assert s.herm_defect == 0.0
    assert s.labels == ("a",)


def test_validate_small_antihermitian_perturbation():
    m = KET0.astype(complex)
    m[0, 1] += 1e-13j
    m[1, 0] += 1e-13j
    s = validate_state(m, [2])
    assert s.herm_defect == pytest.approx(1e-13, rel=1e-6)
    assert np.array_equal(s.matrix, s.matrix.conj().T)


def test_validate_rejects_bad_trace():
    with pytest.raises(TraceNotOne):
        validate_state(np.diag([0.6, 0.6]), [2])


def test_validate_other_errors():
    with pytest.raises(NonSquare):
        validate_state(np.ones((2, 3)), [2])
    with pytest.raises(DimensionMismatch):
        validate_state(np.eye(4) / 4, [2])
    with pytest.raises(HermitianDefectTooLarge):
        validate_state(np.array([[0.5, 1e-3], [0, 0.5]]), [2])
    with pytest.raises(NegativeEigenvalue):
        validate_state(np.diag([1.1, -0.1]), [2])


def test_state_matrix_is_read_only():
    s = validate_state(np.eye(2) / 2, [2])
    with pytest.raises(ValueError):
        s.matrix[0, 0] = 1.0


def test_kron_examples(rng):
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(KET0, KET1), np.diag([0, 1, 0, 0]).astype(complex))
    for _ in range(5):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        a, b = a + a.conj().T, b + b.conj().T
        assert np.trace(kron(a, b)) == pytest.approx(np.trace(a) * np.trace(b), abs=1e-12)


def test_kron_index_formula(rng):
    a = rng.standard_normal((2, 3))
    b = rng.standard_normal((3, 2))
    k = kron(a, b)
    for i, j, p, q in [(0, 0, 0, 0), (1, 2, 2, 1), (0, 1, 1, 0)]:
        assert k[i * 3 + p, j * 2 + q] == a[i, j] * b[p, q]


def test_partial_trace_bell():
    red = partial_trace(named_state("bell"), ["a"])
    assert np.allclose(red.matrix, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_product(rng):
    ra, rb = random_density(rng, 1), random_density(rng, 1)
    s = validate_state(kron(ra.matrix, rb.matrix), [2, 2], ["A", "B"])
    assert np.allclose(partial_trace(s, ["A"]).matrix, ra.matrix, atol=1e-15)


def test_partial_trace_counterexample_ac():
    red = partial_trace(counterexample(PRINTED_POINT), ["a", "c"])
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 0] = 0.6
    for w, th in ((0.05, 3 * math.pi / 10), (0.35, math.pi / 5)):
        psi = np.array([0, math.sin(th), math.cos(th), 0])
        expected += w * np.outer(psi, psi)
    assert red.labels == ("a", "c")
    assert np.abs(red.matrix - expected).max() <= 1e-15


def test_partial_trace_errors():
    s = named_state("ghz")
    with pytest.raises(UnknownLabel):
        partial_trace(s, ["z"])
    with pytest.raises(EmptyKeepSet):
        partial_trace(s, [])


def test_partial_trace_keeps_original_order():
    s = named_state("product011")
    red = partial_trace(s, ["c", "a"])
    assert red.labels == ("a", "c")
    assert red.matrix[1, 1] == 1.0


def test_partial_trace_composition(rng):
    m = random_density(rng, 4)
    s = validate_state(m.matrix, [2] * 4, ["a", "b", "a'", "b'"])
    step = partial_trace(partial_trace(s, ["a", "b", "b'"]), ["a", "b"])
    once = partial_trace(s, ["a", "b"])
    assert np.abs(step.matrix - once.matrix).max() <= 1e-14


def test_eig_examples():
    assert np.allclose(eig_hermitian(np.diag([3.0, 1.0, 2.0])).eigenvalues, [3, 2, 1], atol=1e-15)
    assert np.allclose(eig_hermitian(np.array([[0, 1], [1, 0]])).eigenvalues, [1, -1], atol=1e-15)
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_eig_reconstruction_and_unitarity(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = a + a.conj().T
    sp = eig_hermitian(a)
    v, lam = sp.eigenvectors, sp.eigenvalues
    norm = np.linalg.norm(a)
    assert np.all(np.diff(lam) <= 0)
    assert np.linalg.norm(v @ np.diag(lam) @ v.conj().T - a) <= 1e-10 * norm
    assert np.abs(v.conj().T @ v - np.eye(n)).max() <= 1e-12
    assert np.allclose(lam, np.linalg.eigvalsh(a)[::-1], atol=1e-12 * norm)


def test_sqrt_psd_examples(rng):
    assert np.allclose(sqrt_psd(np.eye(4)), np.eye(4), atol=1e-15)
    assert np.allclose(sqrt_psd(np.diag([4.0, 0.0])), np.diag([2.0, 0.0]), atol=1e-15)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    a = g @ g.conj().T
    r = sqrt_psd(a)
    assert np.linalg.norm(r @ r - a) <= 1e-9
    assert np.abs(r - r.conj().T).max() <= 1e-12
    with pytest.raises(NegativeEigenvalue):
        sqrt_psd(np.diag([1.0, -1e-3]))


def test_entropy_examples():
    assert von_neumann_entropy(validate_state(KET0, [2])) == 0.0
    assert von_neumann_entropy(validate_state(np.eye(2) / 2, [2])) == pytest.approx(1.0, abs=1e-15)
    assert von_neumann_entropy(validate_state(np.eye(4) / 4, [2, 2])) == pytest.approx(2.0, abs=1e-15)


def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    s = validate_state(np.diag([0.25, 0.75]), [2])
    assert abs(binary_entropy(0.25) - von_neumann_entropy(s)) <= 1e-12
    with pytest.raises(OutOfRange):
        binary_entropy(1.5)


def test_trace_distance():
    s = named_state("ghz")
    assert trace_distance(s, s) == 0.0
    assert trace_distance(validate_state(KET0, [2]), validate_state(KET1, [2])) == pytest.approx(1.0)
    d = trace_distance(validate_state(np.eye(2) / 2, [2]), validate_state(np.diag([0.6, 0.4]), [2]))
    assert d == pytest.approx(0.1, abs=1e-15)
    with pytest.raises(DimensionMismatch):
        trace_distance(s, validate_state(KET0, [2]))


def test_ket_norm_check():
    from qcorr.errors import NotNormalized

    with pytest.raises(NotNormalized):
        Ket(np.array([1.0, 1.0]), (2,), ("a",))


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_entropy_bounds_and_spectrum(seed, n):
    rng = np.random.default_rng(seed)
    s = random_density(rng, n)
    ent = von_neumann_entropy(s)
    assert -1e-12 <= ent <= n + 1e-12
    assert abs(eig_hermitian(s.matrix).eigenvalues.sum() - 1.0) <= 1e-9


@given(st.integers(0, 2**32 - 1))
def test_entropy_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    s = random_density(rng, 2)
    u = eig_hermitian(random_density(rng, 2).matrix).eigenvectors
    rotated = validate_state(u @ s.matrix @ u.conj().T, [2, 2])
    assert abs(von_neumann_entropy(rotated) - von_neumann_entropy(s)) <= 1e-10
    w = random_unitary(rng, 4)
    rotated = validate_state(w @ s.matrix @ w.conj().T, [2, 2])
    assert abs(von_neumann_entropy(rotated) - von_neumann_entropy(s)) <= 1e-10


@given(st.integers(0, 2**32 - 1))
def test_entropy_additivity(seed):
    rng = np.random.default_rng(seed)
    r, s = random_density(rng, 1), random_density(rng, 2)
    joint = validate_state(kron(r.matrix, s.matrix), [2, 2, 2])
    assert abs(von_neumann_entropy(joint) - von_neumann_entropy(r) - von_neumann_entropy(s)) <= 1e-10
