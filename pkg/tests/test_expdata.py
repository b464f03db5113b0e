import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbac.closedform import work_from_polarizations
from hbac.engine import RefrigeratorConfig, run_cycles, simulate_polarizations
from hbac.expdata import (
    MeasurementSeries,
    SeriesError,
    analyze,
    format_series,
    parse_series,
)

PREAMBLE = "gamma=0\ntheta=1.5707963267948966\neps2_0=0.6\neps3_0=0.6\n"


def test_parse_minimal_series():
    series = parse_series(PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n1,0.6,0\n")
    assert series.n == (0, 1)
    assert [m.value for m in series.eps1] == [0.0, 0.6]
    assert series.eps2_0.sigma == 0.0


def test_parse_comments_whitespace_and_sorting():
    text = (
        "# header comment\n\n"
        "gamma = 1e-4\n theta=0.924\neps2_0=0.58\nsigma_eps2_0=0.03\neps3_0=0.41\nsigma_eps3_0=0.01\n"
        "n, eps1, sigma_eps1\n"
        "1,0.31,0.03\n# mid comment\n0,0.0,0.03\n2,0.4,0.03\n"
    )
    series = parse_series(text)
    assert series.n == (0, 1, 2)
    assert series.eps1[1].value == 0.31
    assert series.eps2_0.sigma == 0.03
    assert series.eps3_0.sigma == 0.01
    assert series.gamma == 1e-4


@pytest.mark.parametrize(
    "text,message",
    [
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n1,1.5,0\n", "outside"),
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n0,0.6,0\n", "duplicate"),
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n1,0.6\n", "3 columns"),
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n1,abc,0\n", "not a number"),
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n1,0.6,-0.1\n", "negative"),
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n1.5,0.6,0\n", "integer"),
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n2,0.6,0\n", "consecutive"),
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n", "at least two"),
        (PREAMBLE + "n,value,sigma\n0,0,0\n1,0.6,0\n", "header"),
        (PREAMBLE, "header"),
        ("gamma=0\ntheta=1\neps2_0=0.6\nn,eps1,sigma_eps1\n0,0,0\n1,0.6,0\n", "eps3_0"),
        (PREAMBLE + "gamma=0.1\nn,eps1,sigma_eps1\n0,0,0\n1,0.6,0\n", "twice"),
        (PREAMBLE + "delta=3\nn,eps1,sigma_eps1\n0,0,0\n1,0.6,0\n", "unknown"),
        (PREAMBLE + "n,eps1,sigma_eps1\n0,0,0\n1,nan,0\n", "finite"),
        (PREAMBLE.replace("gamma=0", "gamma=2") + "n,eps1,sigma_eps1\n0,0,0\n1,0.6,0\n", "gamma"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(SeriesError, match=message):
        parse_series(text)


def test_format_parse_round_trip():
    series = MeasurementSeries.from_values(
        [0.0, 0.31, 0.45], 0.58, 0.41, 1e-4, math.pi / 3.4, 0.03, 0.03, 0.01, n0=2
    )
    assert parse_series(format_series(series)) == series


def test_ideal_swap_example():
    series = MeasurementSeries.from_values([0.0, 0.6], 0.6, 0.6, 0.0, math.pi / 2)
    (r,) = analyze(series)
    assert r.n == 0
    assert r.Q == pytest.approx(-0.6, abs=1e-15)
    assert r.W == pytest.approx(0.6, abs=1e-15)
    assert r.zeta == pytest.approx(1.0, abs=1e-15)
    assert r.J is None and r.sigma_J is None
    assert r.sigma_Q == 0.0 and r.sigma_W == 0.0
    assert not r.zeta_flagged


@pytest.mark.parametrize("s", [0.0, 0.01, 0.03])
def test_heat_uncertainty_is_root_two(s):
    series = MeasurementSeries.from_values([0.0, 0.3, 0.5, 0.6], 0.6, 0.6, 0.0, 1.0, s)
    for r in analyze(series):
        assert r.sigma_Q == pytest.approx(s * math.sqrt(2), abs=1e-15)
    assert analyze(series)[0].sigma_J == pytest.approx(s * math.sqrt(6), abs=1e-15)


@pytest.mark.parametrize("gamma", [0.0, 1e-4, 0.1])
@pytest.mark.parametrize("theta", [math.pi / 3.4, math.pi / 2, 0.4])
def test_noiseless_round_trip_matches_engine(gamma, theta):
    cfg = RefrigeratorConfig(gamma, theta, 0.0, 0.58, 0.41, 8)
    eps1 = simulate_polarizations(cfg, 9).eps1
    out = analyze(MeasurementSeries.from_values(eps1, 0.58, 0.41, gamma, theta))
    for a, r in zip(out, run_cycles(cfg)):
        assert a.Q == pytest.approx(r.Q, abs=1e-9)
        assert a.W == pytest.approx(r.W, abs=1e-9)
        if a.J is not None:
            assert a.J == pytest.approx(r.J, abs=1e-9)
        if r.zeta is not None and abs(r.W) > 1e-6:
            assert a.zeta == pytest.approx(r.zeta, abs=1e-9)


def _finite_difference_sigma(fn, values, sigmas, h=1e-7):
    total = 0.0
    for i, s in enumerate(sigmas):
        up, down = list(values), list(values)
        up[i] += h
        down[i] -= h
        total += ((fn(up) - fn(down)) / (2 * h) * s) ** 2
    return math.sqrt(total)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0, 1),
    st.floats(0.1, math.pi - 0.1),
    st.floats(-0.9, 0.9),
    st.floats(-0.9, 0.9),
    st.floats(-0.9, 0.9),
    st.floats(-0.9, 0.9),
)
def test_propagated_sigmas_match_numerical_gradient(gamma, theta, e2, e3, a, b):
    sig = [0.03, 0.02, 0.03, 0.01]  # eps1(n), eps1(n+1), eps2, eps3
    series = MeasurementSeries.from_values([a, b], e2, e3, gamma, theta, [sig[0], sig[1]], sig[2], sig[3])
    (r,) = analyze(series)

    def work(v):
        return work_from_polarizations(gamma, theta, v[2], v[3], v[0], v[1])

    def zeta(v):
        return (v[1] - v[0]) / work(v)

    values = [a, b, e2, e3]
    assert r.sigma_W == pytest.approx(_finite_difference_sigma(work, values, sig), rel=1e-5, abs=1e-9)
    if r.zeta is not None:
        assert r.zeta == pytest.approx(zeta(values), rel=1e-12, abs=1e-12)
        assert r.sigma_zeta == pytest.approx(_finite_difference_sigma(zeta, values, sig), rel=1e-4, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(0, 0.05))
def test_undefined_cop_exactly_when_work_within_one_sigma(a, b, s):
    series = MeasurementSeries.from_values([a, b], 0.58, 0.41, 1e-4, math.pi / 3.4, s, 0.03, 0.01)
    (r,) = analyze(series)
    assert (r.zeta is None) == (abs(r.W) < r.sigma_W or abs(r.W) < 1e-14)
    assert (r.sigma_zeta is None) == (r.zeta is None)


def test_zero_angle_gives_undefined_cop():
    (r,) = analyze(MeasurementSeries.from_values([0.1, 0.1], 0.6, 0.6, 0.0, 0.0))
    assert r.W == 0.0
    assert r.zeta is None
    assert not r.zeta_flagged


def test_out_of_range_cop_flagged_not_dropped():
    # heat flows the wrong way: zeta becomes negative
    (r,) = analyze(MeasurementSeries.from_values([0.5, 0.3], 0.6, 0.6, 0.0, math.pi / 2))
    assert r.zeta is not None and r.zeta < 0
    assert r.zeta_flagged


def test_experimental_error_magnitudes():
    cfg = RefrigeratorConfig(1e-4, math.pi / 3.4, 0.0, 0.58, 0.41, 8)
    eps1 = simulate_polarizations(cfg, 9).eps1
    out = analyze(MeasurementSeries.from_values(eps1, 0.58, 0.41, 1e-4, math.pi / 3.4, 0.03, 0.03, 0.01))
    # single-shot errors of a few percent give heat error bars of the same order
    for r in out:
        assert r.sigma_Q == pytest.approx(0.03 * math.sqrt(2))
        assert 0 < r.sigma_W < 0.1
