"""Kraus-list channels for the three-qubit cooling cycle.

Qubit 1 is the target, qubits 2 and 3 are the reset spins. Compression acts in
the two-dimensional subspace spanned by ``|011>`` and ``|100>``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from hbac._backend import backend_for
from hbac.qmat import DensityMatrix, as_matrix, dag, frobenius, kron, partial_trace, qubit_state

IDX_011 = 0b011
IDX_100 = 0b100


class CompressionVariant(enum.Enum):
    RANDOM_UNITARY = "random-unitary"
    PAPER_VERBATIM = "paper-verbatim"
    PAPER_CORRECTED = "paper-corrected"

    @classmethod
    def parse(cls, value: "str | CompressionVariant") -> "CompressionVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for v in cls:
            if v.value == key:
                return v
        choices = ", ".join(v.value for v in cls)
        raise ValueError(f"unknown compression variant {value!r} (choose from {choices})")

    @property
    def trace_preserving(self) -> bool:
        return self is not CompressionVariant.PAPER_VERBATIM


@dataclass(frozen=True)
class KrausChannel:
    """Operator-sum channel ``rho -> sum_k E_k rho E_k^dagger``."""

    kraus_ops: tuple
    label: str = ""
    dim: int = field(init=False)

    def __post_init__(self):
        ops = tuple(as_matrix(e) for e in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for e in ops:
            if e.shape != (d, d):
                raise ValueError(f"Kraus operators must all be {d}x{d}, got {e.shape}")
            e.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "dim", d)

    def __len__(self):
        return len(self.kraus_ops)

    def apply(self, rho) -> np.ndarray:
        m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"channel {self.label!r} acts on {self.dim}x{self.dim}, got {m.shape}")
        out = np.zeros_like(m)
        for e in self.kraus_ops:
            out += e @ m @ dag(e)
        return out

    def completeness(self) -> np.ndarray:
        return sum(dag(e) @ e for e in self.kraus_ops)

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Channel applying ``self`` first and ``other`` second."""
        if other.dim != self.dim:
            raise ValueError("cannot compose channels of different dimension")
        ops = [b @ a for b in other.kraus_ops for a in self.kraus_ops]
        return KrausChannel(ops, f"{other.label}∘{self.label}")


def completeness_defect(ch: KrausChannel) -> float:
    """Frobenius distance of ``sum E^dagger E`` from the identity."""
    return frobenius(ch.completeness() - np.eye(ch.dim))


def _check_unit(name: str, value: float, lo: float, hi: float):
    if not (lo <= value <= hi):
        raise ValueError(f"{name} must lie in [{lo:g}, {hi:g}], got {value}")


def damping_channel(gamma: float) -> KrausChannel:
    """Single-qubit amplitude damping towards ``|0>`` with probability ``gamma``."""
    _check_unit("gamma", gamma, 0.0, 1.0)
    b = backend_for(gamma)
    g1, g2 = b.zeros((2, 2)), b.zeros((2, 2))
    g1[0, 0] = 1
    g1[1, 1] = b.sqrt(1 - gamma)
    g2[0, 1] = b.sqrt(gamma)
    return KrausChannel((g1, g2), f"damping(gamma={float(gamma):g})")


def extended_damping_channel(gamma: float) -> KrausChannel:
    """Damping on the target qubit, identity on the two reset qubits."""
    eye4 = backend_for(gamma).eye(4)
    ops = [kron(g, eye4) for g in damping_channel(gamma).kraus_ops]
    return KrausChannel(ops, f"damping_ext(gamma={float(gamma):g})")


def swap_generator(backend=None) -> np.ndarray:
    """``|100><011| + |011><100|``."""
    v = (backend or backend_for()).zeros((8, 8))
    v[IDX_100, IDX_011] = v[IDX_011, IDX_100] = 1
    return v


def ideal_swap_unitary(backend=None) -> np.ndarray:
    """``exp(-i pi V / 2)``; since ``V^3 = V`` this is ``I - V^2 - i V``."""
    b = backend or backend_for()
    v = swap_generator(b)
    return b.eye(8) - v @ v - 1j * v


def _compression_ops(theta, variant: CompressionVariant) -> list:
    b = backend_for(theta)
    c, s = b.cos(theta), b.sin(theta)
    if variant is CompressionVariant.RANDOM_UNITARY:
        return [s * ideal_swap_unitary(b), c * b.eye(8)]

    h = b.sqrt(b.scalar(0.5))
    v = swap_generator(b)
    proj = v @ v
    k1 = h * (b.eye(8) - proj) - 1j * s * v
    k2 = h * b.eye(8)
    k2[IDX_011, IDX_011] += c - h
    if variant is CompressionVariant.PAPER_VERBATIM:
        k2[IDX_100, IDX_100] -= c - h
    else:
        k2[IDX_100, IDX_100] += c - h
    return [k1, k2]


def compression_channel(theta: float, variant="random-unitary") -> KrausChannel:
    """Imperfect compression with mixing angle ``theta``.

    ``theta = pi/2`` is the ideal swap of ``|011>`` and ``|100>`` populations,
    ``theta = 0`` does nothing. ``PAPER_VERBATIM`` reproduces the printed
    operator pair, which is not trace preserving away from ``theta = pi/4``.
    """
    _check_unit("theta", theta, 0.0, math.pi)
    variant = CompressionVariant.parse(variant)
    return KrausChannel(_compression_ops(theta, variant), f"compression({variant.value}, theta={float(theta):g})")


def reset_weights(eps2: float, eps3: float) -> np.ndarray:
    """Populations ``p2^i p3^j`` of the two reset qubits, indexed ``[i, j]``."""
    p2 = [(1 - eps2) / 2, (1 + eps2) / 2]
    p3 = [(1 - eps3) / 2, (1 + eps3) / 2]
    return np.array([[a * c for c in p3] for a in p2], dtype=object if backend_for(eps2, eps3).name == "mpmath" else float)


def reduced_compression_channel(theta: float, eps2: float, eps3: float, variant="random-unitary") -> KrausChannel:
    """Target-only compression with the reset qubits fixed at their bath states.

    Operators are labelled by the reset input ``ij`` and output ``i'j'``:
    ``<a|C|b> = <a i'j'|K|b ij> sqrt(p2^i p3^j)``. Identically zero operators
    are dropped, leaving at most ten.
    """
    _check_unit("eps2", eps2, -1.0, 1.0)
    _check_unit("eps3", eps3, -1.0, 1.0)
    full = compression_channel(theta, variant)
    b = backend_for(theta, eps2, eps3)
    weights = reset_weights(eps2, eps3)
    ops = []
    for k in full.kraus_ops:
        t = k.reshape(2, 4, 2, 4)  # [a, i'j', b, ij]
        for out_r in range(4):
            for in_r in range(4):
                w = b.sqrt(weights[in_r >> 1, in_r & 1])
                c = w * t[:, out_r, :, in_r]
                if np.any(c != 0):
                    ops.append(c)
    label = f"reduced_compression({CompressionVariant.parse(variant).value}, theta={float(theta):g})"
    return KrausChannel(ops, label)


def refresh(rho, eps2: float, eps3: float) -> DensityMatrix:
    """Replace the reset qubits with their bath states, keeping the target marginal."""
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    if rho.dim != 8:
        raise ValueError(f"refresh acts on three qubits, got dimension {rho.dim}")
    target = partial_trace(rho.matrix, [1])
    return DensityMatrix(kron(target, qubit_state(eps2), qubit_state(eps3)))


def refresh_channel(eps2: float, eps3: float) -> KrausChannel:
    """Kraus form of :func:`refresh`: ``sqrt(p_kl) I (x) |kl><ij|``."""
    b = backend_for(eps2, eps3)
    weights = reset_weights(eps2, eps3).ravel()
    eye2 = b.eye(2)
    ops = []
    for kl in range(4):
        if weights[kl] == 0:
            continue
        for ij in range(4):
            e = b.zeros((4, 4))
            e[kl, ij] = b.sqrt(weights[kl])
            ops.append(kron(eye2, e))
    return KrausChannel(ops, f"refresh(eps2={float(eps2):g}, eps3={float(eps3):g})")


def cycle_channels(gamma: float, theta: float, eps2: float, eps3: float, variant="random-unitary") -> Sequence[KrausChannel]:
    """Damping, compression and refresh of one cycle, in application order."""
    return (
        extended_damping_channel(gamma),
        compression_channel(theta, variant),
        refresh_channel(eps2, eps3),
    )
