"""Dense complex matrix algebra, Hermitian spectra and entropies.

States are carried as :class:`QState` (density matrix plus subsystem dims and
labels).  The tensor order is the order of ``labels``; the leftmost label is
the most significant index, so ``|01>`` on labels ``("a", "c")`` means a=0, c=1.
All entropies are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyKeepSet,
    HermitianDefectTooLarge,
    NegativeEigenvalue,
    NoConvergence,
    NonSquare,
    NotHermitian,
    NotNormalized,
    OutOfRange,
    TraceNotOne,
    UnknownLabel,
    ValidationError,
)

HERM_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-10
EIG_TOL = 1e-13
JACOBI_MAX_SWEEPS = 60


def as_cmatrix(raw) -> np.ndarray:
    """Coerce ``raw`` to a 2-D complex array with finite entries."""
    m = np.array(raw, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex, copy=True)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class QState:
    """A validated density matrix with named subsystems."""

    matrix: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]
    herm_defect: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown label {label!r}; state has {list(self.labels)}") from None

    def relabel(self, labels: Sequence[str]) -> "QState":
        labels = tuple(labels)
        _check_labels(labels, len(self.dims))
        return QState(self.matrix, self.dims, labels, self.herm_defect)

    def permute(self, order: Sequence[str]) -> "QState":
        """Reorder the tensor factors so that they appear in ``order``."""
        order = tuple(order)
        if sorted(order) != sorted(self.labels):
            raise UnknownLabel(f"{order} is not a permutation of {self.labels}")
        perm = [self.index(lab) for lab in order]
        n = len(self.dims)
        t = self.matrix.reshape(self.dims + self.dims)
        t = t.transpose(perm + [p + n for p in perm])
        dims = tuple(self.dims[p] for p in perm)
        return QState(_frozen(t.reshape(self.dim, self.dim)), dims, order, self.herm_defect)


@dataclass(frozen=True, eq=False)
class Ket:
    amplitudes: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(self.labels))
        _check_labels(self.labels, len(self.dims))
        if amps.size != math.prod(self.dims):
            raise DimensionMismatch(f"{amps.size} amplitudes for dims {self.dims}")
        if not np.all(np.isfinite(amps)):
            raise ValidationError("ket has non-finite amplitudes")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > TRACE_TOL:
            raise NotNormalized(f"squared norm {norm2!r} differs from 1")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density(self) -> QState:
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return QState(_frozen(rho), self.dims, self.labels, 0.0)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


def _check_labels(labels: tuple[str, ...], n: int) -> None:
    if len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for {n} subsystems")
    if len(set(labels)) != len(labels):
        raise ValidationError(f"labels must be distinct: {labels}")


def hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def eigvalsh(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (LAPACK)."""
    return np.linalg.eigvalsh(a)


def validate_state(raw, dims: Sequence[int], labels: Sequence[str] | None = None) -> QState:
    """Check ``raw`` is a density matrix over ``dims`` and wrap it.

    The matrix is hermitized as (M + M^H)/2 and the removed defect is recorded.
    The trace is never renormalized.
    """
    m = as_cmatrix(raw)
    if m.shape[0] != m.shape[1]:
        raise NonSquare(f"matrix is {m.shape[0]}x{m.shape[1]}")
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise DimensionMismatch(f"subsystem dimensions must be >= 2, got {dims}")
    if m.shape[0] != math.prod(dims):
        raise DimensionMismatch(f"side {m.shape[0]} != product of dims {dims}")
    if labels is None:
        labels = tuple("abcdefghijklmnopqrstuvwxyz"[: len(dims)])
    labels = tuple(labels)
    _check_labels(labels, len(dims))

    defect = hermitian_defect(m)
    if defect > HERM_TOL:
        raise HermitianDefectTooLarge(f"Hermitian defect {defect:.3e} exceeds {HERM_TOL:g}")
    m = 0.5 * (m + m.conj().T)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"trace {tr!r} differs from 1")
    lam_min = float(eigvalsh(m)[0])
    if lam_min < -PSD_TOL:
        raise NegativeEigenvalue(f"minimum eigenvalue {lam_min:.3e} below -{PSD_TOL:g}")
    return QState(_frozen(m), dims, labels, defect)


def kron(a, b) -> np.ndarray:
    """Kronecker product: (A⊗B)[i*rB + k, j*cB + l] = A[i, j] * B[k, l]."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def _reduce(matrix: np.ndarray, dims: tuple[int, ...], keep_idx: list[int]) -> np.ndarray:
    n = len(dims)
    drop_idx = [i for i in range(n) if i not in keep_idx]
    dk = math.prod(dims[i] for i in keep_idx)
    dd = math.prod(dims[i] for i in drop_idx) if drop_idx else 1
    t = matrix.reshape(dims + dims)
    t = t.transpose(keep_idx + drop_idx + [i + n for i in keep_idx] + [i + n for i in drop_idx])
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ikjk->ij", t)


def partial_trace(s: QState, keep: Iterable[str]) -> QState:
    """Reduced state on ``keep``, in the original relative label order."""
    keep = set(keep)
    if not keep:
        raise EmptyKeepSet("keep set is empty")
    for lab in keep:
        s.index(lab)
    keep_idx = [i for i, lab in enumerate(s.labels) if lab in keep]
    if len(keep_idx) == len(s.labels):
        return s
    m = _reduce(s.matrix, s.dims, keep_idx)
    m = 0.5 * (m + m.conj().T)
    return QState(
        _frozen(m),
        tuple(s.dims[i] for i in keep_idx),
        tuple(s.labels[i] for i in keep_idx),
        0.0,
    )


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    g = abs(apq)
    if g == 0.0:
        return
    phase = apq / g
    app = a[p, p].real
    aqq = a[q, q].real
    tau = (aqq - app) / (2.0 * g)
    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    # U = diag(1, conj(phase)) @ [[c, s], [-s, c]] zeroes the (p, q) entry of U^H A U
    u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
    cols = [p, q]
    a[:, cols] = a[:, cols] @ u
    a[cols, :] = u.conj().T @ a[cols, :]
    v[:, cols] = v[:, cols] @ u
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def eig_hermitian(a) -> Spectrum:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi sweeps."""
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"matrix is {a.shape[0]}x{a.shape[1]}")
    if hermitian_defect(a) > HERM_TOL:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    n = a.shape[0]
    work = 0.5 * (a + a.conj().T)
    vecs = np.eye(n, dtype=complex)
    scale = np.linalg.norm(work)
    target = EIG_TOL * scale

    offdiag = ~np.eye(n, dtype=bool)

    def off_norm() -> float:
        return float(np.linalg.norm(work[offdiag]))

    sweeps = 0
    while off_norm() > target:
        if sweeps >= JACOBI_MAX_SWEEPS:
            raise NoConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(work, vecs, p, q)
        sweeps += 1

    vals = np.diag(work).real.copy()
    order = np.argsort(-vals, kind="stable")
    return Spectrum(vals[order], vecs[:, order])


def _clip_spectrum(vals: np.ndarray) -> np.ndarray:
    lam_min = float(np.min(vals))
    if lam_min < -PSD_TOL:
        raise NegativeEigenvalue(f"eigenvalue {lam_min:.3e} below -{PSD_TOL:g}")
    return np.clip(vals, 0.0, None)


def sqrt_psd(a) -> np.ndarray:
    """Principal square root V diag(sqrt(lambda)) V^H of a PSD matrix."""
    spec = eig_hermitian(a)
    lam = _clip_spectrum(spec.eigenvalues)
    v = spec.eigenvectors
    r = (v * np.sqrt(lam)) @ v.conj().T
    return 0.5 * (r + r.conj().T)


def entropy_of_spectrum(vals) -> float:
    """Shannon entropy (bits) of a clipped eigenvalue list, with 0 log 0 = 0."""
    lam = _clip_spectrum(np.asarray(vals, dtype=float))
    lam = lam[lam > 0.0]
    if lam.size == 0:
        return 0.0
    h = float(-np.sum(lam * np.log2(lam)))
    return h if h > 0.0 else 0.0


def von_neumann_entropy(s) -> float:
    m = s.matrix if isinstance(s, QState) else as_cmatrix(s)
    return entropy_of_spectrum(eigvalsh(m))


def binary_entropy(x: float) -> float:
    if not (0.0 <= x <= 1.0):
        raise OutOfRange(f"probability {x!r} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def trace_distance(a: QState, b: QState) -> float:
    """Half the trace norm of a - b."""
    if a.dims != b.dims:
        raise DimensionMismatch(f"dims {a.dims} vs {b.dims}")
    diff = a.matrix - b.matrix
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(eigvalsh(diff))))


def purity(s: QState) -> float:
    return float(np.real(np.trace(s.matrix @ s.matrix)))
