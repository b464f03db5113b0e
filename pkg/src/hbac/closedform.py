"""Analytic expressions for the three-qubit cooling refrigerator.

All energies use the convention ``<H> = -eps`` per qubit, so the heat drawn
from the target in cycle ``n`` is ``Q(n) = -(eps1(n+1) - eps1(n))``.

Functions fall into two groups. The trusted set (``epsilon1``, ``heat``,
``cooling_power``, ``work_per_cycle``, ``cop`` and the ``main_*`` special
cases) agrees with brute-force channel propagation. ``as_printed`` and the
``printed_*`` helpers evaluate other published forms literally so they can be
compared against the numerics.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

log = logging.getLogger(__name__)

W_ZERO_TOL = 1e-14


@dataclass(frozen=True)
class ClosedFormParams:
    gamma: float
    theta: float
    eps1_0: float
    eps2_0: float
    eps3_0: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        for name in ("eps1_0", "eps2_0", "eps3_0"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [-1, 1], got {v}")

    @property
    def s2(self) -> float:
        return math.sin(self.theta) ** 2

    @property
    def p23(self) -> float:
        return self.eps2_0 * self.eps3_0


def F_and_G(p: ClosedFormParams) -> tuple:
    """``F = 3 + (1 + e2 e3) cos 2theta - e2 e3`` and ``G = ln(4 / ((1 - gamma) F))``."""
    f = 3.0 + (1.0 + p.p23) * math.cos(2.0 * p.theta) - p.p23
    denom = (1.0 - p.gamma) * f
    g = math.inf if denom <= 0.0 else math.log(4.0 / denom)
    return f, g


def decay_factor(p: ClosedFormParams) -> float:
    """Per-cycle contraction ``exp(-G) = (1 - gamma) F / 4``."""
    f, _ = F_and_G(p)
    return (1.0 - p.gamma) * f / 4.0


def _denominator(p: ClosedFormParams) -> float:
    # (gamma - 1) F + 4, rearranged to avoid cancellation when F is close to 4
    return 4.0 * p.gamma + 2.0 * (1.0 - p.gamma) * (1.0 + p.p23) * p.s2


def _transient_amplitude(p: ClosedFormParams) -> float:
    f, _ = F_and_G(p)
    return 2.0 * p.s2 * ((1.0 + p.p23) * p.eps1_0 - p.eps2_0 - p.eps3_0) + p.gamma * (1.0 + p.eps1_0) * f


def epsilon1(p: ClosedFormParams, n: float) -> float:
    """Target polarization after ``n`` cycles (``n = inf`` gives the steady state)."""
    denom = _denominator(p)
    if denom == 0.0:
        # gamma = 0 and no compression: nothing ever happens
        return p.eps1_0
    f, _ = F_and_G(p)
    m = decay_factor(p)
    decay = 0.0 if math.isinf(n) else m**n
    return (2.0 * (p.eps2_0 + p.eps3_0) * p.s2 - p.gamma * f + _transient_amplitude(p) * decay) / denom


def asymptotic_epsilon1(p: ClosedFormParams) -> float:
    return epsilon1(p, math.inf)


def heat(p: ClosedFormParams, n: float) -> float:
    """Heat ``Q(n)``; negative while the target is being cooled."""
    return _transient_amplitude(p) * decay_factor(p) ** n / 4.0


def cooling_power(p: ClosedFormParams, n: float) -> float:
    """``J(n) = Q(n+1) - Q(n) = ((1 - gamma) F / 4 - 1) Q(n)``."""
    return (decay_factor(p) - 1.0) * heat(p, n)


def work_per_cycle(p: ClosedFormParams, n: float, eps1_n: Optional[float] = None, eps1_next: Optional[float] = None) -> float:
    """Gate work in cycle ``n`` written in terms of the target polarizations.

    ``eps1_n`` and ``eps1_next`` default to the closed-form trajectory; passing
    measured values gives the experimental estimate.
    """
    if eps1_n is None and eps1_next is None:
        return _work_closed(p, n)
    e = epsilon1(p, n) if eps1_n is None else eps1_n
    e_next = epsilon1(p, n + 1) if eps1_next is None else eps1_next
    return work_from_polarizations(p.gamma, p.theta, p.eps2_0, p.eps3_0, e, e_next)


def _work_closed(p: ClosedFormParams, n: float) -> float:
    """Same quantity as :func:`work_from_polarizations` on the closed-form
    trajectory, with the steady and transient parts separated so nothing
    cancels near the fixed point.
    """
    d = _denominator(p)
    if d == 0.0:
        return 0.0
    decay = 0.0 if math.isinf(n) else decay_factor(p) ** n
    transient = _transient_amplitude(p) * decay * (d - 4.0 * (1.0 - p.gamma) * (1.0 + p.p23) * p.s2) / (4.0 * d)
    steady = 4.0 * p.gamma * p.s2 * (1.0 + p.eps2_0) * (1.0 + p.eps3_0) / d
    return transient + steady


def work_from_polarizations(gamma, theta, eps2_0, eps3_0, eps1_n, eps1_next) -> float:
    q = eps2_0 * eps3_0 + 1.0
    s2 = math.sin(theta) ** 2
    return s2 * (gamma * q + (gamma - 1.0) * q * eps1_n + eps2_0 + eps3_0) + eps1_n - eps1_next


def cop(p: ClosedFormParams, n: float) -> Optional[float]:
    """``-Q(n) / W(n)``; ``None`` when the work vanishes."""
    w = work_per_cycle(p, n)
    if abs(w) < W_ZERO_TOL:
        return None
    return -heat(p, n) / w


# -- special case eps1(0) = 0, eps2(0) = eps3(0) = eps ----------------------

def _f_equal(theta: float, eps: float) -> float:
    return 3.0 + (1.0 + eps * eps) * math.cos(2.0 * theta) - eps * eps


def _g_equal(theta: float, gamma: float, eps: float) -> float:
    denom = (1.0 - gamma) * _f_equal(theta, eps)
    return math.inf if denom <= 0.0 else math.log(4.0 / denom)


def _decay_equal(theta, gamma, eps, n):
    return ((1.0 - gamma) * _f_equal(theta, eps) / 4.0) ** n


def main_epsilon1(gamma: float, theta: float, eps: float, n: float) -> float:
    f = _f_equal(theta, eps)
    denom = (gamma - 1.0) * f + 4.0
    if denom == 0.0:
        return 0.0
    return (gamma * f + 2.0 * eps * (math.cos(2.0 * theta) - 1.0)) / denom * (_decay_equal(theta, gamma, eps, n) - 1.0)


def main_cooling_power(gamma: float, theta: float, eps: float, n: float) -> float:
    f = _f_equal(theta, eps)
    s2 = math.sin(theta) ** 2
    return ((gamma - 1.0) * f + 4.0) * (4.0 * eps * s2 - gamma * f) * _decay_equal(theta, gamma, eps, n) / 16.0


def main_cop(gamma: float, theta: float, eps: float, n: float) -> Optional[float]:
    f = _f_equal(theta, eps)
    s2 = math.sin(theta) ** 2
    c2 = math.cos(theta) ** 2
    e = _decay_equal(theta, gamma, eps, n)
    num = -(2.0 * gamma * (1.0 + c2) - 2.0 * eps * (2.0 + gamma * eps) * s2) * ((gamma - 1.0) * f + 4.0) * e
    den = (
        ((gamma - 1.0) * (f + 4.0 * (eps * eps + 1.0) * s2) + 4.0)
        * (gamma * f + 2.0 * eps * (math.cos(2.0 * theta) - 1.0))
        * e
        + 16.0 * (1.0 + eps) ** 2 * gamma * s2
    )
    if abs(den) < W_ZERO_TOL:
        return None
    return num / den


def main_max_cooling_power(eps: float, n: int) -> float:
    """Reversible-limit power as printed, with ``theta_n`` from :func:`main_theta_n`."""
    theta_n = main_theta_n(n, eps)
    return 0.5 * eps * (1.0 + eps * eps) * math.exp(-n * _g_equal(theta_n, 0.0, eps))


# -- optimal compression angle -----------------------------------------------

def theta_opt(n: int, eps2_0: float, eps3_0: float) -> float:
    """Stationary point of ``J(n)`` in ``theta`` at ``gamma = 0``.

    The arccos argument is clamped to ``[-1, 1]``; below ``-1`` the power is
    increasing all the way to the ideal swap.
    """
    q = eps2_0 * eps3_0
    arg = (2.0 * q + n * q + n - 6.0) / ((2.0 + n) * (1.0 + q))
    return 0.5 * math.acos(min(1.0, max(-1.0, arg)))


def in_condition_set(eps1_0: float, eps2_0: float, eps3_0: float) -> bool:
    """Membership of the initial polarizations in the ideal-swap region at ``n = 1``."""

    def below_inverse_third(x, y):
        return x == 0.0 or y < 1.0 / (3.0 * x)

    return (
        0.0 <= eps1_0 < 1.0 / math.sqrt(3.0)
        and 0.0 <= eps2_0
        and below_inverse_third(eps1_0, eps2_0)
        and 0.0 <= eps3_0
        and below_inverse_third(eps2_0, eps3_0)
    )


def main_theta_n(n: int, eps: float) -> float:
    """Angle rule for equal reset polarizations and an unpolarized target."""
    if n < 2 and eps < math.sqrt(1.0 / 3.0):
        return math.pi / 2.0
    return theta_opt(n, eps, eps)


def optimal_theta(n: int, eps1_0: float, eps2_0: float, eps3_0: float) -> float:
    """Mixing angle maximizing the cooling power of cycle ``n`` (reversible limit).

    Raises:
        ValueError: unless ``1 >= eps2_0, eps3_0 >= eps1_0 >= 0`` and ``n >= 0``.
    """
    if n < 0:
        raise ValueError("cycle index must be non-negative")
    if not (0.0 <= eps1_0 <= min(eps2_0, eps3_0) and max(eps2_0, eps3_0) <= 1.0):
        raise ValueError(
            "optimal_theta assumes 1 >= (eps2_0, eps3_0) >= eps1_0 >= 0, "
            f"got ({eps1_0}, {eps2_0}, {eps3_0})"
        )
    if n == 0:
        theta = math.pi / 2.0
    elif n == 1 and in_condition_set(eps1_0, eps2_0, eps3_0):
        theta = math.pi / 2.0
    else:
        theta = theta_opt(n, eps2_0, eps3_0)

    if eps1_0 == 0.0 and eps2_0 == eps3_0:
        other = main_theta_n(n, eps2_0)
        if abs(other - theta) > 1e-12:
            log.warning("angle rules disagree at n=%d eps=%g: %.12g (used) vs %.12g", n, eps2_0, theta, other)
    return theta


# -- literal evaluations used by the audit ----------------------------------

class PrintedValues(NamedTuple):
    eps2_tilde: float
    eps3_tilde: float
    W: float
    zeta: Optional[float]


def _reset_overlap(gamma: float, eps_i: float, eps_j: float) -> float:
    return ((gamma - 1.0) * eps_i**2 + eps_i + gamma) * eps_j - eps_i + 1.0


def printed_reset_polarization(p: ClosedFormParams, n: float, qubit: int) -> float:
    """Reset-qubit polarization before refresh, evaluated as printed.

    The unbalanced bracket in the published form is read as
    ``gamma (1 + eps1_0) F``.
    """
    if qubit not in (2, 3):
        raise ValueError("reset qubits are 2 and 3")
    ei, ej = (p.eps2_0, p.eps3_0) if qubit == 2 else (p.eps3_0, p.eps2_0)
    f, _ = F_and_G(p)
    d = (p.gamma - 1.0) * f + 4.0
    first = (2.0 * _reset_overlap(p.gamma, ei, ej) * p.s2 + 4.0 * p.gamma * (1.0 - ei * math.cos(p.theta) ** 2)) / (2.0 * d)
    second = p.s2 * (1.0 + p.p23) / f * _transient_amplitude(p) / d * decay_factor(p) ** n
    return first + second


def printed_work(p: ClosedFormParams, n: float) -> float:
    f, _ = F_and_G(p)
    d = (p.gamma - 1.0) * f + 4.0
    decay = 0.0 if math.isinf(n) else decay_factor(p) ** n
    first = 4.0 * p.s2 * (1.0 + p.eps2_0) * (1.0 + p.eps3_0) / d
    factor = 1.0 + 4.0 * p.gamma * p.s2 * (1.0 + p.p23) * (p.gamma - 1.0) / d
    return first + factor * _transient_amplitude(p) * decay / 4.0


def printed_cop(p: ClosedFormParams, n: float) -> Optional[float]:
    f, _ = F_and_G(p)
    d = (p.gamma - 1.0) * f + 4.0
    r = _transient_amplitude(p)
    decay = 0.0 if math.isinf(n) else decay_factor(p) ** n
    num = -d * r * decay
    den = (d - 4.0 * (1.0 + p.p23) * (1.0 - p.gamma) * p.s2) * r * decay + 16.0 * p.s2 * (1.0 + p.eps2_0) * (1.0 + p.eps3_0)
    if abs(den) < W_ZERO_TOL:
        return None
    return num / den


def as_printed(p: ClosedFormParams, n: float) -> PrintedValues:
    return PrintedValues(
        printed_reset_polarization(p, n, 2),
        printed_reset_polarization(p, n, 3),
        printed_work(p, n),
        printed_cop(p, n),
    )


def printed_small_gamma_cop(p: ClosedFormParams, n: float) -> float:
    """First-order-in-gamma COP at ``theta = pi/2`` as printed."""
    num = (1.0 + p.eps2_0) * (1.0 + p.eps3_0)
    den = p.eps1_0 - p.eps2_0 - p.eps3_0 + p.eps1_0 * p.p23
    g0 = _g_at(p, math.pi / 2.0, 0.0)
    return 1.0 + 4.0 * p.gamma / (1.0 + p.p23) * (1.0 + num / den * math.exp(n * g0))


def printed_small_gamma_max_power(p: ClosedFormParams, n: int) -> float:
    """Reversible-limit power for general polarizations, including its printed gamma term."""
    e1, e2, e3, q = p.eps1_0, p.eps2_0, p.eps3_0, p.p23
    theta_n = optimal_theta(n, e1, e2, e3) if 0 <= e1 <= min(e2, e3) else theta_opt(n, e2, e3)
    scale = math.exp(-n * _g_at(p, theta_n, 0.0)) / (2.0 - 2.0 * q)
    lead = (1.0 + q) * (e2 + e3 - e1 * (1.0 + q)) * scale
    corr = p.gamma * (2 * e2 + 2 * e3 + q * q - 1.0 - (1.0 + q) * (e1 * (n - 3 + (1 + n) * q) - n * (e2 + e3))) * scale
    return lead + corr


def _g_at(p: ClosedFormParams, theta: float, gamma: float) -> float:
    f = 3.0 + (1.0 + p.p23) * math.cos(2.0 * theta) - p.p23
    denom = (1.0 - gamma) * f
    return math.inf if denom <= 0.0 else math.log(4.0 / denom)
