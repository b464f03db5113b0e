"""Cycle-by-cycle simulation of the refrigerator and its thermodynamic record.

Each cycle applies damping to the target, compression to all three qubits and
a refresh of the reset qubits, all as 64x64 Liouville-space matrices. Energies
use ``<H> = -eps`` per qubit, so cooling the target gives ``Q(n) < 0`` and the
gates supply ``W(n) > 0``.
"""
from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import mpmath
import numpy as np

from hbac._backend import to_float
from hbac.channels import (
    CompressionVariant,
    compression_channel,
    damping_channel,
    extended_damping_channel,
    reduced_compression_channel,
    refresh_channel,
)
from hbac.liouville import Scope, cycle_superoperator, fixed_point, superoperator_of, vectorize
from hbac.qmat import DensityMatrix, kron, qubit_state

W_ZERO_TOL = 1e-14
CROSS_CHECK_TOL = 1e-10

# rows give p(|1>) - p(|0>) of qubits 1, 2, 3 from the 8 diagonal populations
_POLARIZATION_ROWS = np.array([[2 * ((k >> (2 - q)) & 1) - 1 for k in range(8)] for q in range(3)])
_DIAG = np.arange(8) * 9


@dataclass(frozen=True)
class RefrigeratorConfig:
    gamma: float = 0.0
    theta: float = math.pi / 2
    eps1_0: float = 0.0
    eps2_0: float = 0.6
    eps3_0: float = 0.6
    cycles: int = 20
    variant: CompressionVariant = CompressionVariant.RANDOM_UNITARY
    precision: Optional[int] = None
    """Decimal digits for mpmath arithmetic; ``None`` uses doubles."""

    def __post_init__(self):
        object.__setattr__(self, "variant", CompressionVariant.parse(self.variant))
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        for name in ("eps1_0", "eps2_0", "eps3_0"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [-1, 1], got {v}")
        if int(self.cycles) != self.cycles or self.cycles < 0:
            raise ValueError(f"cycles must be a non-negative integer, got {self.cycles}")
        if self.precision is not None and self.precision < 16:
            raise ValueError("precision must be at least 16 digits")


@dataclass(frozen=True)
class CycleRecord:
    """Thermodynamic bookkeeping of cycle ``n`` (the step ``n -> n+1``).

    ``eps1`` is the target polarization at the start of the cycle, the tilde
    values are reset polarizations after compression and before refresh.
    ``zeta`` and ``zeta_carnot`` are ``None`` where undefined.
    """

    n: int
    eps1: float
    eps2_tilde: float
    eps3_tilde: float
    Q: float
    W: float
    J: float
    zeta: Optional[float]
    T_c: float
    zeta_carnot: Optional[float]

    def as_dict(self) -> dict:
        return asdict(self)


def temperature_of(eps: float) -> float:
    """Spin temperature ``1 / ln((1 + eps) / (1 - eps))`` with ``k_B = 1``.

    Returns ``inf`` at ``eps = 0``, ``0`` at ``eps = 1`` and negative values for
    population inversion.
    """
    if not -1.0 <= eps <= 1.0:
        raise ValueError(f"polarization must lie in [-1, 1], got {eps}")
    if eps == 0.0:
        return math.inf
    if eps == 1.0:
        return 0.0
    if eps == -1.0:
        return -0.0
    inverse = 2.0 * math.atanh(eps)  # ln((1 + eps) / (1 - eps)) without cancellation
    if abs(inverse) < 1.0 / sys.float_info.max:
        return math.copysign(math.inf, eps)
    return 1.0 / inverse


CARNOT_GAP_TOL = 1e-12


def carnot_cop(eps_cold: float, eps_hot: float) -> Optional[float]:
    """``T_c / (T_h - T_c)``; ``None`` unless the cold side is colder.

    Polarizations closer than :data:`CARNOT_GAP_TOL` count as equal, since the
    ratio would only amplify rounding noise.
    """
    if abs(eps_cold - eps_hot) <= CARNOT_GAP_TOL:
        return None
    t_c = temperature_of(eps_cold)
    t_h = temperature_of(eps_hot)
    if not t_c < t_h:
        return None
    if math.isinf(t_h):
        return 0.0
    return t_c / (t_h - t_c)


def _polarizations(v) -> np.ndarray:
    return _POLARIZATION_ROWS @ v[_DIAG]


def _polarization_change(phi, trace_preserving: bool = True):
    """Rows mapping a state vector to the polarization change caused by ``phi``.

    For a population ``b`` the change of qubit ``q`` is
    ``sum_a (s_q(a) - s_q(b)) P(a|b)``, which for a trace-preserving map equals
    ``sum_a s_q(a) P(a|b) - s_q(b)`` but does not pick up rounding from the
    completeness relation. Near the fixed point that rounding would otherwise
    swamp the tiny population transfer.
    """
    rows = _POLARIZATION_ROWS @ phi[_DIAG]
    for b, col in enumerate(_DIAG):
        if trace_preserving:
            rows[:, col] = rows[:, col] - _POLARIZATION_ROWS[:, b] * phi[_DIAG, col].sum()
        else:
            rows[:, col] = rows[:, col] - _POLARIZATION_ROWS[:, b]
    return rows


def _params(config: RefrigeratorConfig):
    if config.precision is None:
        return config.gamma, config.theta, config.eps2_0, config.eps3_0, config.eps1_0
    mpf = mpmath.mpf
    return mpf(config.gamma), mpf(config.theta), mpf(config.eps2_0), mpf(config.eps3_0), mpf(config.eps1_0)


def _initial_vector(eps1, eps2, eps3):
    return vectorize(kron(qubit_state(eps1), qubit_state(eps2), qubit_state(eps3)))


class _Stepper:
    """The three stroke superoperators and their polarization-change rows."""

    def __init__(self, gamma, theta, eps2, eps3, variant):
        self.damp = superoperator_of(extended_damping_channel(gamma)).matrix
        self.swap = superoperator_of(compression_channel(theta, variant)).matrix
        self.refresh = superoperator_of(refresh_channel(eps2, eps3)).matrix
        self.damp_change = _polarization_change(self.damp)
        self.swap_change = _polarization_change(self.swap, CompressionVariant.parse(variant).trace_preserving)


def _check_state(v, variant: CompressionVariant):
    if variant.trace_preserving:
        DensityMatrix(np.asarray(v, dtype=complex).reshape(8, 8))


@dataclass
class Trace:
    """Raw output of :func:`simulate_polarizations` for ``steps`` cycles.

    ``eps1`` has ``steps + 1`` entries; ``tilde``, ``heat`` and ``work`` one
    per cycle. ``heat[n]`` equals ``-(eps1[n+1] - eps1[n])`` and ``work[n]``
    equals ``-[(eps1[n+1] - eps1[n]) + (t2 - eps2_0) + (t3 - eps3_0)]``, both
    accumulated stroke by stroke.
    """

    eps1: list
    tilde: list
    heat: list
    work: list


def _build_records(trace: Trace, eps2_0, cycles: int) -> List[CycleRecord]:
    """Turn a trace of ``cycles + 1`` steps into ``cycles`` records."""
    eps1, tilde, q = trace.eps1, trace.tilde, trace.heat
    records = []
    for n in range(cycles):
        t2, t3 = tilde[n]
        w = trace.work[n]
        zeta = None if abs(w) < W_ZERO_TOL else to_float(-q[n] / w)
        e1 = to_float(eps1[n])
        e1 = min(1.0, max(-1.0, e1))
        records.append(
            CycleRecord(
                n=n,
                eps1=e1,
                eps2_tilde=to_float(t2),
                eps3_tilde=to_float(t3),
                Q=to_float(q[n]),
                W=to_float(w),
                J=to_float(q[n + 1] - q[n]),
                zeta=zeta,
                T_c=temperature_of(e1),
                zeta_carnot=carnot_cop(e1, to_float(eps2_0)),
            )
        )
    return records


def simulate_polarizations(config: RefrigeratorConfig, steps: int, validate: bool = True) -> Trace:
    """Polarizations, heat and work of ``steps`` cycles.

    Values are mpmath numbers when ``config.precision`` is set.
    """
    gamma, theta, eps2, eps3, eps1 = _params(config)
    st = _Stepper(gamma, theta, eps2, eps3, config.variant)
    v = _initial_vector(eps1, eps2, eps3)
    trace = Trace([eps1], [], [], [])
    for _ in range(steps):
        v = _step(st, v, trace)
        if validate:
            _check_state(v, config.variant)
    return trace


def _step(st: _Stepper, v, trace: Trace):
    """Advance ``v`` by one cycle, appending the cycle's bookkeeping to ``trace``."""
    d_damp = (st.damp_change @ v)[0].real
    w = st.damp @ v
    d_swap = [x.real for x in st.swap_change @ w]
    u = st.swap @ w
    pol = _polarizations(u)
    trace.tilde.append((pol[1].real, pol[2].real))
    trace.heat.append(-(d_damp + d_swap[0]))
    trace.work.append(-(d_damp + d_swap[0] + d_swap[1] + d_swap[2]))
    v = st.refresh @ u
    trace.eps1.append(_polarizations(v)[0].real)
    return v


def steady_state_cycle(config: RefrigeratorConfig, squarings: int = 20) -> Trace:
    """One cycle started from the limit state ``lim Phi^n rho(0)``.

    The limit is approximated by repeated squaring of the 64x64 cycle
    superoperator. Double precision only.
    """
    phi = cycle_superoperator(config.gamma, config.theta, config.eps2_0, config.eps3_0, config.variant)
    rho0 = kron(qubit_state(config.eps1_0), qubit_state(config.eps2_0), qubit_state(config.eps3_0))
    v = vectorize(fixed_point(phi, rho0, squarings))
    st = _Stepper(config.gamma, config.theta, config.eps2_0, config.eps3_0, config.variant)
    trace = Trace([_polarizations(v)[0].real], [], [], [])
    _step(st, v, trace)
    return trace


def run_cycles(config: RefrigeratorConfig, cross_check: bool = False) -> List[CycleRecord]:
    """Simulate ``config.cycles`` cycles (plus one internally for ``J``).

    With ``cross_check`` the target polarizations are also propagated with the
    4x4 target-only superoperator and compared within 1e-10.
    """
    if config.precision is None:
        trace = simulate_polarizations(config, config.cycles + 1)
        records = _build_records(trace, config.eps2_0, config.cycles)
    else:
        with mpmath.workdps(config.precision):
            trace = simulate_polarizations(config, config.cycles + 1)
            records = _build_records(trace, config.eps2_0, config.cycles)
    if cross_check:
        _cross_check(config, [to_float(e) for e in trace.eps1])
    return records


def _cross_check(config: RefrigeratorConfig, eps1: Sequence[float]):
    phi = cycle_superoperator(
        config.gamma, config.theta, config.eps2_0, config.eps3_0, config.variant, Scope.TARGET_ONLY
    ).matrix
    v = vectorize(qubit_state(config.eps1_0))
    for n, e in enumerate(eps1):
        reduced = float((v[3] - v[0]).real)
        if abs(reduced - to_float(e)) > CROSS_CHECK_TOL:
            raise RuntimeError(f"target-only and full propagation disagree at n={n}: {reduced!r} vs {e!r}")
        v = phi @ v


def sample_trajectory(config: RefrigeratorConfig, seed) -> List[CycleRecord]:
    """One stochastic realisation of the random-unitary compression.

    Every cycle applies the ideal swap with probability ``sin^2 theta`` and
    the identity otherwise; damping and refresh are unchanged.
    """
    if config.variant is not CompressionVariant.RANDOM_UNITARY:
        raise ValueError("trajectory sampling needs the random-unitary compression variant")
    steps = config.cycles + 1
    rng = np.random.default_rng(seed)
    swaps = rng.random(steps) < math.sin(config.theta) ** 2
    batch = _sample_batch(config, swaps[:, None])
    trace = Trace(
        list(batch.eps1[:, 0]),
        [(a[0], b[0]) for a, b in batch.tilde],
        list(batch.heat[:, 0]),
        list(batch.work[:, 0]),
    )
    return _build_records(trace, config.eps2_0, config.cycles)


def sample_polarizations(config: RefrigeratorConfig, n_traj: int, seed) -> np.ndarray:
    """``eps1(0..cycles)`` for ``n_traj`` independent trajectories, shape ``(n_traj, cycles+1)``."""
    if config.variant is not CompressionVariant.RANDOM_UNITARY:
        raise ValueError("trajectory sampling needs the random-unitary compression variant")
    rng = np.random.default_rng(seed)
    swaps = rng.random((config.cycles, n_traj)) < math.sin(config.theta) ** 2
    return _sample_batch(config, swaps).eps1.T


def _sample_batch(config: RefrigeratorConfig, swaps: np.ndarray) -> Trace:
    """Propagate many trajectories at once; ``swaps`` has shape ``(steps, n_traj)``."""
    st = _Stepper(config.gamma, math.pi / 2, config.eps2_0, config.eps3_0, CompressionVariant.RANDOM_UNITARY)
    steps, n_traj = swaps.shape
    v = np.repeat(_initial_vector(config.eps1_0, config.eps2_0, config.eps3_0)[:, None], n_traj, axis=1)
    eps1 = np.empty((steps + 1, n_traj))
    heat = np.empty((steps, n_traj))
    work = np.empty((steps, n_traj))
    eps1[0] = config.eps1_0
    tilde = []
    for k in range(steps):
        d_damp = (st.damp_change[0] @ v).real
        w = st.damp @ v
        d_swap = np.where(swaps[k][None, :], (st.swap_change @ w).real, 0.0)
        u = np.where(swaps[k][None, :], st.swap @ w, w)
        pol = _polarizations(u).real
        tilde.append((pol[1], pol[2]))
        heat[k] = -(d_damp + d_swap[0])
        work[k] = -(d_damp + d_swap.sum(axis=0))
        v = st.refresh @ u
        eps1[k + 1] = _polarizations(v)[0].real
    return Trace(eps1, tilde, heat, work)


def target_polarizations_over_theta(
    gamma: float, thetas, eps1_0: float, eps2_0: float, eps3_0: float, steps: int
) -> np.ndarray:
    """``eps1(0..steps)`` for many mixing angles at once, random-unitary compression.

    The reduced compression superoperator of the random-unitary mixture is
    ``sin^2 theta * Phi(pi/2) + cos^2 theta * Phi(0)``, so one pair of 4x4
    matrices built from the channels covers the whole angle grid.

    Returns:
        Array of shape ``(len(thetas), steps + 1)``.
    """
    thetas = np.asarray(thetas, dtype=float)
    if np.any((thetas < 0) | (thetas > math.pi)):
        raise ValueError("theta values must lie in [0, pi]")
    damp = superoperator_of(damping_channel(gamma)).matrix
    swap = superoperator_of(reduced_compression_channel(math.pi / 2, eps2_0, eps3_0)).matrix @ damp
    idle = superoperator_of(reduced_compression_channel(0.0, eps2_0, eps3_0)).matrix @ damp
    s2 = np.sin(thetas) ** 2
    phi = s2[:, None, None] * swap + (1.0 - s2)[:, None, None] * idle
    v = np.repeat(vectorize(qubit_state(eps1_0))[None, :], thetas.size, axis=0)
    out = np.empty((thetas.size, steps + 1))
    out[:, 0] = eps1_0
    for k in range(steps):
        v = np.einsum("tij,tj->ti", phi, v)
        out[:, k + 1] = (v[:, 3] - v[:, 0]).real
    return out


def cooling_power_over_theta(gamma, thetas, eps1_0, eps2_0, eps3_0, n: int) -> np.ndarray:
    """Numeric ``J(n) = Q(n+1) - Q(n)`` across an angle grid."""
    e = target_polarizations_over_theta(gamma, thetas, eps1_0, eps2_0, eps3_0, n + 2)
    return -e[:, n] + 2.0 * e[:, n + 1] - e[:, n + 2]
