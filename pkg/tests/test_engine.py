import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hbac.closedform import ClosedFormParams, F_and_G, epsilon1
from hbac.engine import (
    RefrigeratorConfig,
    carnot_cop,
    cooling_power_over_theta,
    run_cycles,
    sample_polarizations,
    sample_trajectory,
    simulate_polarizations,
    steady_state_cycle,
    target_polarizations_over_theta,
    temperature_of,
)


def test_config_validation():
    with pytest.raises(ValueError, match="gamma"):
        RefrigeratorConfig(gamma=1.1)
    with pytest.raises(ValueError, match="theta"):
        RefrigeratorConfig(theta=-0.1)
    with pytest.raises(ValueError, match="eps2_0"):
        RefrigeratorConfig(eps2_0=2)
    with pytest.raises(ValueError, match="cycles"):
        RefrigeratorConfig(cycles=-1)
    with pytest.raises(ValueError, match="variant"):
        RefrigeratorConfig(variant="nope")
    with pytest.raises(ValueError, match="precision"):
        RefrigeratorConfig(precision=8)


def test_default_first_record():
    r = run_cycles(RefrigeratorConfig(cycles=3))[0]
    assert r.n == 0
    assert r.Q == pytest.approx(-0.6, abs=1e-15)
    assert r.W == pytest.approx(0.6, abs=1e-15)
    assert r.zeta == pytest.approx(1.0, abs=1e-15)
    assert r.J == pytest.approx(0.408, abs=1e-15)
    assert math.isinf(r.T_c)
    assert r.zeta_carnot is None


def test_record_count_and_dict():
    records = run_cycles(RefrigeratorConfig(cycles=5))
    assert [r.n for r in records] == list(range(5))
    assert set(records[0].as_dict()) == {
        "n", "eps1", "eps2_tilde", "eps3_tilde", "Q", "W", "J", "zeta", "T_c", "zeta_carnot"
    }


@pytest.mark.parametrize("gamma", [0.0, 1e-4, 0.1, 0.7])
@pytest.mark.parametrize("theta", [0.0, math.pi / 6, math.pi / 3.4, math.pi / 2, 2.4])
@pytest.mark.parametrize("eps", [(0.0, 0.6, 0.6), (0.1, 0.58, 0.41), (-0.4, 0.2, 0.9)])
def test_records_match_population_oracle(gamma, theta, eps):
    e1, e2, e3 = eps
    cycles = 12
    records = run_cycles(RefrigeratorConfig(gamma, theta, e1, e2, e3, cycles), cross_check=True)
    ref_eps1, ref_tilde, ref_q, ref_w = oracles.cycle_trace(gamma, theta, e1, e2, e3, cycles + 1)
    for r in records:
        n = r.n
        assert r.eps1 == pytest.approx(ref_eps1[n], abs=1e-13)
        assert r.eps2_tilde == pytest.approx(ref_tilde[n][0], abs=1e-13)
        assert r.eps3_tilde == pytest.approx(ref_tilde[n][1], abs=1e-13)
        assert r.Q == pytest.approx(ref_q[n], abs=1e-13)
        assert r.W == pytest.approx(ref_w[n], abs=1e-13)
        assert r.J == pytest.approx(ref_q[n + 1] - ref_q[n], abs=1e-13)
        assert r.Q == pytest.approx(-(ref_eps1[n + 1] - ref_eps1[n]), abs=1e-13)


@pytest.mark.parametrize("variant", ["random-unitary", "paper-corrected"])
@pytest.mark.parametrize("theta", [0.2, math.pi / 6, math.pi / 3, math.pi / 2, 2.0, 3.0])
def test_reversible_cop_is_one(variant, theta):
    records = run_cycles(RefrigeratorConfig(0.0, theta, 0.0, 0.58, 0.41, 25, variant))
    for r in records:
        assert r.zeta == pytest.approx(1.0, abs=1e-10)


def test_zero_angle_gives_undefined_cop():
    for r in run_cycles(RefrigeratorConfig(0.0, 0.0, 0.1, 0.6, 0.6, 4)):
        assert r.W == 0.0
        assert r.zeta is None


@pytest.mark.parametrize("gamma", [0.0, 0.01, 0.1])
@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 3.4, math.pi / 2])
def test_heat_decays_geometrically(gamma, theta):
    e2, e3 = 0.58, 0.41
    records = run_cycles(RefrigeratorConfig(gamma, theta, 0.0, e2, e3, 15))
    f, _ = F_and_G(ClosedFormParams(gamma, theta, 0.0, e2, e3))
    for a, b in zip(records, records[1:]):
        assert b.Q / a.Q == pytest.approx((1 - gamma) * f / 4, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(
    st.floats(0, 1), st.floats(0, math.pi), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
)
def test_exchange_symmetry_of_reset_qubits(gamma, theta, e1, e2, e3):
    a = run_cycles(RefrigeratorConfig(gamma, theta, e1, e2, e3, 6))
    b = run_cycles(RefrigeratorConfig(gamma, theta, e1, e3, e2, 6))
    for x, y in zip(a, b):
        assert x.eps1 == pytest.approx(y.eps1, abs=1e-12)
        assert x.Q == pytest.approx(y.Q, abs=1e-12)
        assert x.W == pytest.approx(y.W, abs=1e-12)


@pytest.mark.parametrize("gamma", [1e-4, 0.05, 0.5])
def test_damping_only_limit(gamma):
    e1 = 0.3
    trace = simulate_polarizations(RefrigeratorConfig(gamma, 0.0, e1, 0.6, 0.6), 30)
    for n, e in enumerate(trace.eps1):
        assert e == pytest.approx(-1 + (1 + e1) * (1 - gamma) ** n, abs=1e-12)


@pytest.mark.parametrize("e2,e3", [(0.6, 0.6), (0.58, 0.41), (0.2, 0.9)])
def test_first_ideal_compression_reset_marginal(e2, e3):
    r = run_cycles(RefrigeratorConfig(0.0, math.pi / 2, 0.0, e2, e3, 1))[0]
    # with eps1 = 0 the closed marginal reduces to (e2 - e3) / 2
    assert r.eps2_tilde == pytest.approx((e2 - e3) / 2, abs=1e-15)
    assert r.eps3_tilde == pytest.approx((e3 - e2) / 2, abs=1e-15)


def test_verbatim_variant_runs_without_state_validation():
    records = run_cycles(RefrigeratorConfig(0.0, math.pi / 3, 0.0, 0.6, 0.6, 4, "paper-verbatim"))
    assert len(records) == 4


def test_temperature_values():
    assert temperature_of(0.6) == pytest.approx(1 / math.log(4), abs=1e-15)
    assert temperature_of(1.2 / 1.36) == pytest.approx(1 / math.log(16), abs=1e-12)
    assert temperature_of(0.0) == math.inf
    assert temperature_of(1.0) == 0.0
    assert temperature_of(-0.6) == pytest.approx(-1 / math.log(4))
    assert temperature_of(5e-324) == math.inf
    assert temperature_of(1e-300) == pytest.approx(5e299)
    with pytest.raises(ValueError):
        temperature_of(1.5)


def test_carnot_cop_values():
    assert carnot_cop(1.2 / 1.36, 0.6) == pytest.approx(1.0, abs=1e-9)
    assert carnot_cop(0.6, 0.6) is None
    assert carnot_cop(0.3, 0.6) is None
    gap = 2.0**-50  # exactly representable distance from full polarization
    t_c = 1 / math.log((2 - gap) / gap)
    assert carnot_cop(1.0 - gap, 0.6) == pytest.approx(t_c / (1 / math.log(4) - t_c), rel=1e-6)
    assert carnot_cop(0.5, 0.0) == 0.0


@pytest.mark.parametrize("gamma", [0.0, 0.01])
@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 2])
def test_steady_state_cycle_matches_closed_form(gamma, theta):
    trace = steady_state_cycle(RefrigeratorConfig(gamma, theta, 0.0, 0.6, 0.6))
    p = ClosedFormParams(gamma, theta, 0.0, 0.6, 0.6)
    assert trace.eps1[0] == pytest.approx(epsilon1(p, math.inf), abs=1e-12)
    assert trace.heat[0] == pytest.approx(0.0, abs=1e-12)


def test_extended_precision_matches_doubles():
    cfg = dict(gamma=0.01, theta=math.pi / 3, eps1_0=0.1, eps2_0=0.58, eps3_0=0.41, cycles=5)
    a = run_cycles(RefrigeratorConfig(**cfg))
    b = run_cycles(RefrigeratorConfig(**cfg, precision=30))
    for x, y in zip(a, b):
        for field in ("eps1", "eps2_tilde", "eps3_tilde", "Q", "W", "J", "zeta"):
            assert getattr(x, field) == pytest.approx(getattr(y, field), abs=1e-14)
        assert isinstance(y.eps1, float)


def test_cross_check_passes():
    run_cycles(RefrigeratorConfig(0.1, 1.0, 0.1, 0.58, 0.41, 30), cross_check=True)


def test_trajectory_ideal_swap_is_deterministic_run():
    cfg = RefrigeratorConfig(0.01, math.pi / 2, 0.0, 0.58, 0.41, 10)
    for a, b in zip(sample_trajectory(cfg, seed=3), run_cycles(cfg)):
        for field in ("eps1", "eps2_tilde", "eps3_tilde", "Q", "W", "J"):
            assert getattr(a, field) == pytest.approx(getattr(b, field), abs=1e-14)


def test_trajectory_identity_branch():
    records = sample_trajectory(RefrigeratorConfig(0.0, 0.0, 0.25, 0.6, 0.6, 8), seed=1)
    assert all(r.eps1 == pytest.approx(0.25, abs=1e-15) for r in records)


def test_trajectory_seed_determinism_and_variant_check():
    cfg = RefrigeratorConfig(0.0, math.pi / 3, 0.0, 0.6, 0.6, 10)
    assert sample_trajectory(cfg, 42) == sample_trajectory(cfg, 42)
    np.testing.assert_array_equal(sample_polarizations(cfg, 50, 9), sample_polarizations(cfg, 50, 9))
    with pytest.raises(ValueError):
        sample_trajectory(RefrigeratorConfig(variant="paper-corrected"), 0)
    with pytest.raises(ValueError):
        sample_polarizations(RefrigeratorConfig(variant="paper-corrected"), 10, 0)


def test_trajectory_values_come_from_swap_or_idle_branches():
    cfg = RefrigeratorConfig(0.0, math.pi / 3, 0.0, 0.6, 0.6, 1)
    first = sample_polarizations(cfg, 200, 0)[:, 1]
    assert set(np.round(first, 12)) <= {0.0, 0.6}


def test_angle_batch_matches_engine():
    thetas = [0.0, 0.3, math.pi / 3.4, 2.9]
    batch = target_polarizations_over_theta(0.01, thetas, 0.1, 0.58, 0.41, 8)
    for row, theta in zip(batch, thetas):
        trace = simulate_polarizations(RefrigeratorConfig(0.01, theta, 0.1, 0.58, 0.41), 8)
        np.testing.assert_allclose(row, np.array(trace.eps1, dtype=float), atol=1e-14)
    j = cooling_power_over_theta(0.01, thetas, 0.1, 0.58, 0.41, 3)
    for value, theta in zip(j, thetas):
        assert value == pytest.approx(run_cycles(RefrigeratorConfig(0.01, theta, 0.1, 0.58, 0.41, 4))[3].J, abs=1e-14)
    with pytest.raises(ValueError):
        target_polarizations_over_theta(0.0, [4.0], 0.0, 0.6, 0.6, 2)
