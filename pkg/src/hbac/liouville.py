"""Liouville-space representation of the cooling channels.

Density matrices are vectorized by stacking rows, so ``vec(A rho B) =
(A kron B^T) vec(rho)`` and a Kraus list ``{E}`` becomes the matrix
``sum E kron conj(E)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from hbac.channels import (
    KrausChannel,
    compression_channel,
    damping_channel,
    extended_damping_channel,
    reduced_compression_channel,
    refresh_channel,
)
from hbac.qmat import DensityMatrix, as_matrix


class Scope(enum.Enum):
    TARGET_ONLY = "target-only"
    FULL = "full"


def vectorize(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    return m.reshape(-1).copy()


def unvectorize(v) -> np.ndarray:
    v = np.asarray(v)
    v = (v if v.dtype == object else v.astype(complex)).reshape(-1)
    d = math.isqrt(v.size)
    if d * d != v.size or d == 0:
        raise ValueError(f"supervector length {v.size} is not a perfect square")
    return v.reshape(d, d).copy()


@dataclass(frozen=True)
class Superoperator:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1] or math.isqrt(m.shape[0]) ** 2 != m.shape[0]:
            raise ValueError(f"superoperator must be D^2 x D^2, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        """Hilbert-space dimension ``D`` of the states it acts on."""
        return math.isqrt(self.matrix.shape[0])

    def __matmul__(self, other):
        if isinstance(other, Superoperator):
            if other.dim != self.dim:
                raise ValueError("superoperator dimensions differ")
            return Superoperator(self.matrix @ other.matrix, f"{self.label}·{other.label}")
        return self.matrix @ np.asarray(other)

    def apply(self, rho) -> np.ndarray:
        return unvectorize(self.matrix @ vectorize(rho))

    def power(self, n: int) -> "Superoperator":
        if n < 0:
            raise ValueError("power must be non-negative")
        return Superoperator(np.linalg.matrix_power(self.matrix, n), f"({self.label})^{n}")


def superoperator_of(ch: KrausChannel) -> Superoperator:
    m = sum(np.kron(e, np.conj(e)) for e in ch.kraus_ops)
    return Superoperator(m, ch.label)


def cycle_superoperator(gamma, theta, eps2, eps3, variant="random-unitary", scope=Scope.FULL) -> Superoperator:
    """One refrigeration cycle as a single matrix.

    ``TARGET_ONLY`` gives the 4x4 map damping-then-reduced-compression on the
    target qubit. ``FULL`` gives the 64x64 map refresh·compression·damping on
    all three qubits.
    """
    scope = Scope(scope) if not isinstance(scope, Scope) else scope
    if scope is Scope.TARGET_ONLY:
        phi_d = superoperator_of(damping_channel(gamma))
        phi_c = superoperator_of(reduced_compression_channel(theta, eps2, eps3, variant))
        return phi_c @ phi_d
    phi_d = superoperator_of(extended_damping_channel(gamma))
    phi_c = superoperator_of(compression_channel(theta, variant))
    phi_r = superoperator_of(refresh_channel(eps2, eps3))
    return phi_r @ phi_c @ phi_d


def propagate(phi: Superoperator, rho0, n: int, validate: bool = True):
    """``unvec(phi^n vec(rho0))`` using repeated squaring for the power.

    Returns a :class:`DensityMatrix` unless ``validate`` is false, in which
    case the raw matrix is returned (useful for non trace-preserving maps).
    """
    if n < 0:
        raise ValueError("cycle count must be non-negative")
    v = vectorize(rho0)
    if v.size != phi.matrix.shape[0]:
        raise ValueError(f"state of dimension {math.isqrt(v.size)} does not match superoperator dimension {phi.dim}")
    out = unvectorize(np.linalg.matrix_power(phi.matrix, n) @ v)
    return DensityMatrix(out) if validate else out


def iterate(phi: Superoperator, rho0, n: int) -> list:
    """States after 0, 1, ..., n sequential applications (raw matrices)."""
    v = vectorize(rho0)
    if v.size != phi.matrix.shape[0]:
        raise ValueError("state dimension does not match superoperator")
    out = [unvectorize(v)]
    for _ in range(n):
        v = phi.matrix @ v
        out.append(unvectorize(v))
    return out


def fixed_point(phi: Superoperator, rho0, squarings: int = 20) -> np.ndarray:
    """Approximate ``lim phi^n rho0`` with ``n = 2**squarings``.

    Rounding in the unit eigenvalue grows with every squaring, so the result
    is renormalized to unit trace; 20 squarings (about a million cycles) keep
    the drift near 1e-10 before that correction.
    """
    m = phi.matrix
    for _ in range(squarings):
        m = m @ m
    out = unvectorize(m @ vectorize(rho0))
    return out / np.trace(out)
