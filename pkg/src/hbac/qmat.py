"""Dense complex linear algebra for small qubit registers.

Matrices are plain ``numpy.ndarray`` objects of complex dtype (or object dtype
holding mpmath numbers for extended precision). Qubit 1 is the
most significant tensor factor, so the three-qubit basis state ``|q1 q2 q3>``
sits at index ``4*q1 + 2*q2 + q3``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from hbac._backend import backend_for

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10

_EIG_HERMITIAN_TOL = 1e-10


class StateError(ValueError):
    """Raised when a matrix violates a density-matrix invariant."""


def as_matrix(a) -> np.ndarray:
    """Copy ``a`` into a 2-d complex array; object arrays (mpmath) stay object."""
    m = np.array(a)
    if m.dtype != object:
        m = m.astype(complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.astype(complex))):
        raise ValueError("matrix has non-finite entries")
    return m


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def kron(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor most significant."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=complex), "fro"))


def partial_trace(m, keep: Iterable[int], n_qubits: int = 3) -> np.ndarray:
    """Reduce ``m`` onto the qubits listed in ``keep`` (1-based, ascending order kept).

    Raises:
        ValueError: if ``m`` is not ``2**n_qubits`` square or ``keep`` is empty
            or names a qubit outside ``1..n_qubits``.
    """
    m = as_matrix(m)
    dim = 2**n_qubits
    if m.shape != (dim, dim):
        raise ValueError(f"partial_trace expects a {dim}x{dim} matrix, got {m.shape}")
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep-set must not be empty")
    if keep[0] < 1 or keep[-1] > n_qubits:
        raise ValueError(f"qubit indices must lie in 1..{n_qubits}, got {keep}")

    t = m.reshape((2,) * (2 * n_qubits))
    # trace out from the highest index down so axis numbers stay valid
    n = n_qubits
    for q in reversed(range(1, n_qubits + 1)):
        if q in keep:
            continue
        t = np.trace(t, axis1=q - 1, axis2=q - 1 + n)
        n -= 1
    k = 2 ** len(keep)
    return t.reshape(k, k)


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and frobenius(m - dag(m)) <= tol


def hermitian_eigenvalues(m, tol: float = 1e-15, max_sweeps: int = 50) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each off-diagonal element ``a_pq = |a_pq| e^{i phi}`` is removed by a phase
    rotation that makes the 2x2 block real, followed by an ordinary real Jacobi
    rotation. Sweeps repeat until the off-diagonal Frobenius norm falls below
    ``tol`` times the full norm.

    Returns:
        Real eigenvalues in ascending order.

    Raises:
        ValueError: if ``m`` is not square or not Hermitian within 1e-10.
    """
    a = as_matrix(m).copy()
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got {a.shape}")
    if frobenius(a - dag(a)) > _EIG_HERMITIAN_TOL:
        raise ValueError("hermitian_eigenvalues requires a Hermitian matrix")
    a = 0.5 * (a + dag(a))

    scale = frobenius(a)
    if scale == 0.0:
        return np.zeros(n)
    threshold = tol * scale
    for _ in range(max_sweeps):
        off = frobenius(a - np.diag(np.diag(a)))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                r = abs(b)
                if r <= 1e-300 or r < 1e-18 * scale:
                    continue
                phase = b / r
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # g = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = dag(g) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(a).real)


def qubit_state(eps: float) -> np.ndarray:
    """Diagonal single-qubit state ``diag(1 - eps, 1 + eps) / 2``."""
    if not -1.0 <= eps <= 1.0:
        raise ValueError(f"polarization must lie in [-1, 1], got {eps}")
    b = backend_for(eps)
    m = b.zeros((2, 2))
    m[0, 0] = (1 - eps) / 2
    m[1, 1] = (1 + eps) / 2
    return m


def polarization(rho1) -> float:
    """Population imbalance ``p(|1>) - p(|0>)`` of a single-qubit matrix."""
    rho1 = np.asarray(rho1)
    d = rho1[1, 1] - rho1[0, 0]
    return d.real if rho1.dtype == object else float(d.real)


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix on ``log2(dim)`` qubits."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix).astype(complex)
        d = m.shape[0]
        if m.shape != (d, d) or d < 2 or d & (d - 1):
            raise StateError(f"density matrix must be square with power-of-two size, got {m.shape}")
        if frobenius(m - dag(m)) > HERMITIAN_TOL:
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"density matrix trace is {tr.real:.15g}, expected 1")
        # diagonal matrices need no rotations; skip straight to the check
        if np.count_nonzero(m - np.diag(np.diag(m))) == 0:
            evals = np.sort(np.diag(m).real)
        else:
            evals = hermitian_eigenvalues(m)
        if evals[0] < PSD_TOL:
            raise StateError(f"density matrix has negative eigenvalue {evals[0]:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @classmethod
    def product(cls, *eps: float) -> "DensityMatrix":
        """Product of diagonal qubit states with the given polarizations."""
        return cls(kron(*(qubit_state(e) for e in eps)))

    def marginal(self, qubit: int) -> np.ndarray:
        if self.n_qubits == 1:
            return self.matrix
        return partial_trace(self.matrix, [qubit], self.n_qubits)

    def polarization(self, qubit: int = 1) -> float:
        return polarization(self.marginal(qubit))
