"""Thermodynamic evaluation of measured target polarizations.

Input files are comma separated with an optional preamble of ``key=value``
lines, ``#`` comments anywhere, and a table headed ``n,eps1,sigma_eps1``::

    # cycle data
    gamma=1e-4
    theta=0.924
    eps2_0=0.58
    sigma_eps2_0=0.03
    eps3_0=0.41
    sigma_eps3_0=0.01
    n,eps1,sigma_eps1
    0,0.0,0.03
    1,0.31,0.03

Uncertainties are propagated to first order with independent inputs.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

from hbac.closedform import work_from_polarizations

HEADER = ("n", "eps1", "sigma_eps1")
REQUIRED_KEYS = ("gamma", "theta", "eps2_0", "eps3_0")
OPTIONAL_KEYS = ("sigma_eps2_0", "sigma_eps3_0")
ZETA_FLAG_RANGE = (0.0, 1.5)


class SeriesError(ValueError):
    """Malformed or out-of-range measurement input."""


@dataclass(frozen=True)
class Measured:
    value: float
    sigma: float = 0.0


@dataclass(frozen=True)
class MeasurementSeries:
    n: Tuple[int, ...]
    eps1: Tuple[Measured, ...]
    eps2_0: Measured
    eps3_0: Measured
    gamma: float
    theta: float

    def __post_init__(self):
        if len(self.n) != len(self.eps1):
            raise SeriesError("cycle indices and polarizations differ in length")
        if len(self.eps1) < 2:
            raise SeriesError("a series needs at least two cycles")
        if any(b - a != 1 for a, b in zip(self.n, self.n[1:])):
            raise SeriesError(f"cycle indices must be consecutive, got {list(self.n)}")
        for label, m in [("eps2_0", self.eps2_0), ("eps3_0", self.eps3_0)] + [
            (f"eps1[{k}]", m) for k, m in zip(self.n, self.eps1)
        ]:
            if not -1.0 <= m.value <= 1.0:
                raise SeriesError(f"{label} = {m.value} is outside [-1, 1]")
            if not (math.isfinite(m.sigma) and m.sigma >= 0.0):
                raise SeriesError(f"{label} has invalid uncertainty {m.sigma}")
        if not 0.0 <= self.gamma <= 1.0:
            raise SeriesError(f"gamma = {self.gamma} is outside [0, 1]")
        if not 0.0 <= self.theta <= math.pi:
            raise SeriesError(f"theta = {self.theta} is outside [0, pi]")

    @classmethod
    def from_values(cls, eps1: Sequence[float], eps2_0: float, eps3_0: float, gamma: float, theta: float,
                    sigma_eps1=0.0, sigma_eps2_0=0.0, sigma_eps3_0=0.0, n0: int = 0) -> "MeasurementSeries":
        sig = [sigma_eps1] * len(eps1) if isinstance(sigma_eps1, (int, float)) else list(sigma_eps1)
        return cls(
            n=tuple(range(n0, n0 + len(eps1))),
            eps1=tuple(Measured(float(e), float(s)) for e, s in zip(eps1, sig)),
            eps2_0=Measured(float(eps2_0), float(sigma_eps2_0)),
            eps3_0=Measured(float(eps3_0), float(sigma_eps3_0)),
            gamma=float(gamma),
            theta=float(theta),
        )


@dataclass(frozen=True)
class ExperimentalRecord:
    n: int
    Q: float
    sigma_Q: float
    W: float
    sigma_W: float
    J: Optional[float]
    sigma_J: Optional[float]
    zeta: Optional[float]
    sigma_zeta: Optional[float]
    zeta_flagged: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _number(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SeriesError(f"{where}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise SeriesError(f"{where}: {text!r} is not finite")
    return value


def parse_series(text: str) -> MeasurementSeries:
    """Parse the delimited format described in the module docstring."""
    params = {}
    rows = []
    header_seen = False
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if "=" in line:
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in REQUIRED_KEYS + OPTIONAL_KEYS:
                    raise SeriesError(f"line {lineno}: unknown parameter {key!r}")
                if key in params:
                    raise SeriesError(f"line {lineno}: parameter {key!r} given twice")
                params[key] = _number(value.strip(), f"line {lineno}")
                continue
            cols = tuple(c.strip() for c in next(csv.reader([line])))
            if cols != HEADER:
                raise SeriesError(f"line {lineno}: expected header {','.join(HEADER)}, got {line!r}")
            header_seen = True
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if len(cells) != 3:
            raise SeriesError(f"line {lineno}: expected 3 columns, got {len(cells)}")
        n = _number(cells[0], f"line {lineno}")
        if n != int(n):
            raise SeriesError(f"line {lineno}: cycle index {cells[0]!r} is not an integer")
        rows.append((int(n), _number(cells[1], f"line {lineno}"), _number(cells[2], f"line {lineno}"), lineno))

    missing = [k for k in REQUIRED_KEYS if k not in params]
    if missing:
        raise SeriesError(f"missing parameter(s): {', '.join(missing)}")
    if not header_seen:
        raise SeriesError("no data header found")
    rows.sort()
    for a, b in zip(rows, rows[1:]):
        if a[0] == b[0]:
            raise SeriesError(f"line {b[3]}: duplicate cycle index {b[0]}")
    for n, value, sigma, lineno in rows:
        if not -1.0 <= value <= 1.0:
            raise SeriesError(f"line {lineno}: eps1 = {value} is outside [-1, 1]")
        if sigma < 0:
            raise SeriesError(f"line {lineno}: negative uncertainty {sigma}")
    return MeasurementSeries(
        n=tuple(r[0] for r in rows),
        eps1=tuple(Measured(r[1], r[2]) for r in rows),
        eps2_0=Measured(params["eps2_0"], params.get("sigma_eps2_0", 0.0)),
        eps3_0=Measured(params["eps3_0"], params.get("sigma_eps3_0", 0.0)),
        gamma=params["gamma"],
        theta=params["theta"],
    )


def format_series(series: MeasurementSeries) -> str:
    fmt = repr  # shortest string that parses back to the same float
    lines = [
        f"gamma={fmt(series.gamma)}",
        f"theta={fmt(series.theta)}",
        f"eps2_0={fmt(series.eps2_0.value)}",
        f"sigma_eps2_0={fmt(series.eps2_0.sigma)}",
        f"eps3_0={fmt(series.eps3_0.value)}",
        f"sigma_eps3_0={fmt(series.eps3_0.sigma)}",
        ",".join(HEADER),
    ]
    lines += [f"{n},{fmt(m.value)},{fmt(m.sigma)}" for n, m in zip(series.n, series.eps1)]
    return "\n".join(lines) + "\n"


def _quad(*terms) -> float:
    """Root sum of squares of ``(partial derivative, sigma)`` pairs."""
    return math.sqrt(sum((d * s) ** 2 for d, s in terms))


def _work_gradient(gamma, theta, eps2, eps3, e_n):
    """Partial derivatives of :func:`work_from_polarizations` w.r.t. (e_n, e_next, eps2, eps3)."""
    s2 = math.sin(theta) ** 2
    q = eps2 * eps3 + 1.0
    return (
        s2 * (gamma - 1.0) * q + 1.0,
        -1.0,
        s2 * (gamma * eps3 + (gamma - 1.0) * eps3 * e_n + 1.0),
        s2 * (gamma * eps2 + (gamma - 1.0) * eps2 * e_n + 1.0),
    )


def analyze(series: MeasurementSeries) -> List[ExperimentalRecord]:
    """Heat, work, cooling power and COP per cycle with propagated errors.

    A record is produced for every cycle with a successor measurement;
    ``J`` needs two successors and is ``None`` for the last record.
    ``zeta`` is ``None`` when ``|W|`` is below its own uncertainty.
    """
    e = [m.value for m in series.eps1]
    s = [m.sigma for m in series.eps1]
    g, th = series.gamma, series.theta
    e2, s2 = series.eps2_0.value, series.eps2_0.sigma
    e3, s3 = series.eps3_0.value, series.eps3_0.sigma

    records = []
    for k in range(len(e) - 1):
        q = -(e[k + 1] - e[k])
        sq = _quad((1.0, s[k]), (1.0, s[k + 1]))

        w = work_from_polarizations(g, th, e2, e3, e[k], e[k + 1])
        dw = _work_gradient(g, th, e2, e3, e[k])
        sw = _quad((dw[0], s[k]), (dw[1], s[k + 1]), (dw[2], s2), (dw[3], s3))

        if k + 2 < len(e):
            j = -e[k] + 2.0 * e[k + 1] - e[k + 2]
            sj = _quad((1.0, s[k]), (2.0, s[k + 1]), (1.0, s[k + 2]))
        else:
            j = sj = None

        if abs(w) < sw or abs(w) < 1e-14:
            zeta = szeta = None
        else:
            # zeta = (e_next - e_n) / W
            zeta = -q / w
            dz_en = (-w - (e[k + 1] - e[k]) * dw[0]) / w**2
            dz_enext = (w - (e[k + 1] - e[k]) * dw[1]) / w**2
            dz_e2 = -zeta * dw[2] / w
            dz_e3 = -zeta * dw[3] / w
            szeta = _quad((dz_en, s[k]), (dz_enext, s[k + 1]), (dz_e2, s2), (dz_e3, s3))
        flagged = zeta is not None and not ZETA_FLAG_RANGE[0] <= zeta <= ZETA_FLAG_RANGE[1]
        records.append(ExperimentalRecord(series.n[k], q, sq, w, sw, j, sj, zeta, szeta, flagged))
    return records
