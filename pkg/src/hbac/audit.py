"""Closed-form expressions checked against brute-force channel propagation.

Each :class:`AuditRow` pairs one analytic value with the matching number from
the 64-dimensional simulation. Rows come in four kinds:

``trusted``
    Expressions expected to agree with the numerics; ``|delta|`` above
    :data:`TRUSTED_TOL` is a genuine failure.
``as-printed``
    Literal evaluations of published forms that are known to disagree; the
    deviation is reported as a finding.
``probe``
    Small-gamma expansions and the reversible-limit maximum power, which only
    hold approximately or at special angles.
``convention``
    The Kraus-to-superoperator formula paired with row- and column-stacking
    vectorization on a state with complex coherences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from hbac import closedform as cf
from hbac.channels import compression_channel
from hbac.engine import RefrigeratorConfig, run_cycles, steady_state_cycle
from hbac.liouville import superoperator_of

TRUSTED_TOL = 1e-9

KINDS = ("trusted", "as-printed", "probe", "convention")


@dataclass(frozen=True)
class AuditRow:
    formula: str
    kind: str
    gamma: float
    theta: float
    eps1_0: float
    eps2_0: float
    eps3_0: float
    n: float
    closed_form: Optional[float]
    numeric: Optional[float]

    @property
    def delta(self) -> Optional[float]:
        if self.closed_form is None or self.numeric is None:
            return None
        return abs(self.closed_form - self.numeric)

    @property
    def exceeds(self) -> bool:
        """True when the two values differ beyond :data:`TRUSTED_TOL`
        (or only one of them is defined)."""
        if self.closed_form is None and self.numeric is None:
            return False
        d = self.delta
        return d is None or d > TRUSTED_TOL


def _rows_for_point(gamma, theta, eps1_0, eps2_0, eps3_0, cycles) -> List[AuditRow]:
    p = cf.ClosedFormParams(gamma, theta, eps1_0, eps2_0, eps3_0)
    records = run_cycles(RefrigeratorConfig(gamma, theta, eps1_0, eps2_0, eps3_0, cycles), cross_check=True)
    point = (gamma, theta, eps1_0, eps2_0, eps3_0)
    rows = []

    def add(formula, kind, n, closed, numeric):
        rows.append(AuditRow(formula, kind, *point, n, closed, None if numeric is None else float(numeric)))

    equal_resets = eps1_0 == 0.0 and eps2_0 == eps3_0
    for r in records:
        n = r.n
        add("epsilon1", "trusted", n, cf.epsilon1(p, n), r.eps1)
        add("heat", "trusted", n, cf.heat(p, n), r.Q)
        add("cooling_power", "trusted", n, cf.cooling_power(p, n), r.J)
        add("work_per_cycle", "trusted", n, cf.work_per_cycle(p, n), r.W)
        add("cop", "trusted", n, cf.cop(p, n), r.zeta)
        if equal_resets:
            add("main_epsilon1", "trusted", n, cf.main_epsilon1(gamma, theta, eps2_0, n), r.eps1)
            add("main_cooling_power", "trusted", n, cf.main_cooling_power(gamma, theta, eps2_0, n), r.J)
            add("main_cop", "trusted", n, cf.main_cop(gamma, theta, eps2_0, n), r.zeta)

        # record n holds the reset marginals produced by compression n + 1
        add("printed_reset_eps2", "as-printed", n + 1, cf.printed_reset_polarization(p, n + 1, 2), r.eps2_tilde)
        add("printed_reset_eps3", "as-printed", n + 1, cf.printed_reset_polarization(p, n + 1, 3), r.eps3_tilde)
        add("printed_work", "as-printed", n, cf.printed_work(p, n), r.W)
        add("printed_cop", "as-printed", n, cf.printed_cop(p, n), r.zeta)

    steady = steady_state_cycle(RefrigeratorConfig(gamma, theta, eps1_0, eps2_0, eps3_0))
    add("epsilon1", "trusted", math.inf, cf.epsilon1(p, math.inf), steady.eps1[0])
    add("work_per_cycle", "trusted", math.inf, cf.work_per_cycle(p, math.inf), steady.work[0])
    add("printed_work", "as-printed", math.inf, cf.printed_work(p, math.inf), steady.work[0])
    return rows


def _probe_rows(gamma, eps1_0, eps2_0, eps3_0, cycles) -> List[AuditRow]:
    """Small-gamma expansions at the ideal swap and the maximum-power forms."""
    rows = []
    half_pi = math.pi / 2.0
    p = cf.ClosedFormParams(gamma, half_pi, eps1_0, eps2_0, eps3_0)
    records = run_cycles(RefrigeratorConfig(gamma, half_pi, eps1_0, eps2_0, eps3_0, cycles))
    for r in records:
        rows.append(AuditRow("small_gamma_cop", "probe", gamma, half_pi, eps1_0, eps2_0, eps3_0, r.n,
                             cf.printed_small_gamma_cop(p, r.n), r.zeta))

    ordered = 0.0 <= eps1_0 <= min(eps2_0, eps3_0)
    for n in range(min(cycles, 7)):
        if ordered:
            theta_n = cf.optimal_theta(n, eps1_0, eps2_0, eps3_0)
            j = run_cycles(RefrigeratorConfig(gamma, theta_n, eps1_0, eps2_0, eps3_0, n + 1))[n].J
            rows.append(AuditRow("small_gamma_max_power", "probe", gamma, theta_n, eps1_0, eps2_0, eps3_0, n,
                                 cf.printed_small_gamma_max_power(p, n), j))
        if gamma == 0.0 and eps1_0 == 0.0 and eps2_0 == eps3_0:
            theta_n = cf.main_theta_n(n, eps2_0)
            j = run_cycles(RefrigeratorConfig(0.0, theta_n, 0.0, eps2_0, eps3_0, n + 1))[n].J
            rows.append(AuditRow("main_max_cooling_power", "probe", 0.0, theta_n, 0.0, eps2_0, eps3_0, n,
                                 cf.main_max_cooling_power(eps2_0, n), j))
    return rows


def _test_state() -> np.ndarray:
    """Fixed three-qubit density matrix with complex coherences."""
    d = np.diag([0.2, 0.05, 0.1, 0.15, 0.12, 0.08, 0.18, 0.12]).astype(complex)
    d[3, 4] = 0.03 + 0.05j
    d[4, 3] = np.conj(d[3, 4])
    d[0, 7] = 0.02 - 0.01j
    d[7, 0] = np.conj(d[0, 7])
    # coherence between a state outside the swap subspace and |011>
    d[2, 3] = 0.04 + 0.06j
    d[3, 2] = np.conj(d[2, 3])
    return d


def _convention_rows(theta: float) -> List[AuditRow]:
    ch = compression_channel(theta)
    phi = superoperator_of(ch).matrix
    rho = _test_state()
    direct = ch.apply(rho)
    by_rows = (phi @ rho.reshape(-1)).reshape(8, 8)
    by_cols = (phi @ rho.T.reshape(-1)).reshape(8, 8).T
    nan = math.nan
    return [
        AuditRow("superoperator_row_stacking", "convention", nan, theta, nan, nan, nan, 1,
                 0.0, float(np.abs(by_rows - direct).max())),
        AuditRow("superoperator_column_stacking", "convention", nan, theta, nan, nan, nan, 1,
                 0.0, float(np.abs(by_cols - direct).max())),
    ]


def run_audit(
    gammas: Sequence[float],
    thetas: Sequence[float],
    eps1_0: float = 0.0,
    eps2_0: float = 0.6,
    eps3_0: float = 0.6,
    cycles: int = 20,
) -> List[AuditRow]:
    """All audit rows over the ``gammas x thetas`` grid, in a fixed order."""
    if not gammas or not thetas:
        raise ValueError("audit grid must not be empty")
    rows = []
    for g in sorted(gammas):
        for t in sorted(thetas):
            rows.extend(_rows_for_point(g, t, eps1_0, eps2_0, eps3_0, cycles))
    for g in sorted(gammas):
        rows.extend(_probe_rows(g, eps1_0, eps2_0, eps3_0, cycles))
    rows.extend(_convention_rows(sorted(thetas)[-1]))
    return rows


def summarize(rows: Iterable[AuditRow]) -> dict:
    """Count of rows beyond tolerance and largest ``|delta|`` for each formula."""
    out = {}
    for r in rows:
        s = out.setdefault(r.formula, {"kind": r.kind, "rows": 0, "exceeding": 0, "max_delta": 0.0})
        s["rows"] += 1
        s["exceeding"] += int(r.exceeds)
        if r.delta is not None and r.delta > s["max_delta"]:
            s["max_delta"] = r.delta
    return out
