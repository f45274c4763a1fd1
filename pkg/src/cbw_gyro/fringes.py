"""Fringe metrology on intensity traces.

Peak positions are refined with a three-point parabola; widths are measured
between the two half-maximum crossings using linear interpolation between
grid samples. Both steps are deterministic and O(h^2) accurate on smooth
fringes.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable

import numpy as np

from .cavity import CavityConfig, Trace, default_grid, superpose, sweep

__all__ = [
    "AnalysisError",
    "CaseReport",
    "CaseResult",
    "FringeMetrics",
    "Peak",
    "find_peaks",
    "fringe_metrics",
    "fwhm",
    "principal_peak",
    "resolution_gain",
    "verify_paper_cases",
    "zeta_invariance",
]


class AnalysisError(ValueError):
    """A fringe measurement is not defined on the given trace."""


@dataclasses.dataclass(frozen=True)
class Peak:
    position: float
    height: float
    index: int
    channel: str = "A"


@dataclasses.dataclass(frozen=True)
class CaseResult:
    name: str
    psi: tuple
    residual: float
    passed: bool


@dataclasses.dataclass(frozen=True)
class CaseReport:
    tol: float
    cases: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def __getitem__(self, name: str) -> CaseResult:
        for c in self.cases:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "tol": self.tol,
            "passed": self.passed,
            "cases": [dataclasses.asdict(c) for c in self.cases],
        }


@dataclasses.dataclass(frozen=True)
class FringeMetrics:
    peaks: list
    fwhm_cbw: float
    fwhm_fp: float
    resolution_gain: float
    case_report: CaseReport | None = None


def find_peaks(trace: Trace, channel: str = "A", min_height: float = 0.5) -> list:
    """Interior local maxima of one channel.

    `min_height` is a fraction of the trace's overall maximum (which is 1 on a
    normalized trace), so results do not depend on the trace scale.
    """
    y = np.asarray(trace.channel(channel), dtype=float)
    x = np.asarray(trace.psi_grid, dtype=float)
    top = max(float(np.max(trace.i_a)), float(np.max(trace.i_b)))
    if top <= 0.0:
        return []
    threshold = min_height * top
    mid = y[1:-1]
    is_max = (mid > y[:-2]) & (mid >= y[2:]) & (mid > threshold)
    peaks = []
    for k in np.flatnonzero(is_max) + 1:
        y0, y1, y2 = y[k - 1], y[k], y[k + 1]
        denom = y0 - 2.0 * y1 + y2
        offset = 0.5 * (y0 - y2) / denom if denom != 0.0 else 0.0
        h_left, h_right = x[k] - x[k - 1], x[k + 1] - x[k]
        step = h_right if offset >= 0 else h_left
        peaks.append(Peak(float(x[k] + offset * step), float(y1), int(k), channel.upper()))
    return peaks


def _crossing(x, y, j_out: int, j_in: int, level: float) -> float:
    x0, x1, y0, y1 = x[j_out], x[j_in], y[j_out], y[j_in]
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def fwhm(trace: Trace, peak: Peak) -> float:
    """Full width at half of the peak intensity, in radians."""
    y = np.asarray(trace.channel(peak.channel), dtype=float)
    x = np.asarray(trace.psi_grid, dtype=float)
    half = 0.5 * peak.height
    left = peak.index
    while left >= 0 and y[left] >= half:
        left -= 1
    right = peak.index
    while right < y.size and y[right] >= half:
        right += 1
    if left < 0 or right >= y.size:
        raise AnalysisError(
            f"half maximum of the peak at {peak.position:.6g} is not bracketed by the grid"
        )
    return _crossing(x, y, right, right - 1, half) - _crossing(x, y, left, left + 1, half)


def principal_peak(
    trace: Trace, channel: str = "A", target: float = math.pi, min_height: float = 0.5
) -> Peak:
    peaks = find_peaks(trace, channel, min_height)
    if not peaks:
        raise AnalysisError(f"no peak above {min_height} in channel {channel}")
    return min(peaks, key=lambda p: (abs(p.position - target), p.index))


def resolution_gain(
    cbw: Trace, fp: Trace, channel: str = "A", target: float = math.pi
) -> float:
    """``FWHM(fp) / FWHM(cbw)`` at the peaks nearest `target`."""
    w_cbw = fwhm(cbw, principal_peak(cbw, channel, target))
    w_fp = fwhm(fp, principal_peak(fp, channel, target))
    return w_fp / w_cbw


# (name, probe phases, expected normalized level): (i) pi/2 odd multiples,
# (ii) even multiples of pi, (iii) odd multiples of pi.
ANALYTIC_CASES = (
    ("i", (-3 * math.pi / 2, -math.pi / 2, math.pi / 2, 3 * math.pi / 2), 0.0),
    ("ii", (-2 * math.pi, 0.0, 2 * math.pi), 0.0),
    ("iii", (-3 * math.pi, -math.pi, math.pi, 3 * math.pi), 1.0),
)


def verify_paper_cases(
    cfg: CavityConfig,
    tol: float = 1e-5,
    *,
    grid: np.ndarray | None = None,
    trace: Trace | None = None,
    workers: int = 1,
) -> CaseReport:
    """Check the three analytic interference cases on normalized intensities.

    Cases (i) and (ii) require both port intensities below `tol`; case (iii)
    requires port A within `tol` of 1 and port B below `tol`. Intensities are
    normalized by the larger of the sweep maximum and the probe values.
    A precomputed unnormalized `trace` may be supplied to skip the sweep.
    """
    if trace is None:
        grid = default_grid() if grid is None else grid
        trace = sweep(cfg, grid=grid, normalize=False, workers=workers)
    elif trace.normalized:
        raise ValueError("verify_paper_cases needs an unnormalized trace")
    probes = np.array(sorted({p for _, pts, _ in ANALYTIC_CASES for p in pts}))
    fields = superpose(probes, cfg)
    i_a, i_b = np.abs(fields.a) ** 2, np.abs(fields.b) ** 2
    norm = max(float(np.max(trace.i_a)), float(np.max(trace.i_b)),
               float(np.max(i_a)), float(np.max(i_b)))
    i_a, i_b = i_a / norm, i_b / norm
    lookup = {float(p): k for k, p in enumerate(probes)}

    results = []
    for name, pts, level in ANALYTIC_CASES:
        idx = [lookup[float(p)] for p in pts]
        residual = max(
            float(np.max(np.abs(i_a[idx] - level))), float(np.max(i_b[idx]))
        )
        results.append(CaseResult(name, tuple(pts), residual, bool(residual < tol)))
    return CaseReport(tol, tuple(results))


def zeta_invariance(
    cfg: CavityConfig,
    zeta_grid: Iterable[float] = (0.0, math.pi / 4, math.pi / 2, math.pi, 3 * math.pi),
    *,
    grid: np.ndarray | None = None,
    differential: bool = False,
    base: Trace | None = None,
    workers: int = 1,
) -> float:
    """Largest change of the normalized intensities when zeta is varied.

    Compares sweeps at each zeta in `zeta_grid` against zeta = 0 over both
    ports. ``differential=True`` switches to the differential-zeta model,
    which is a diagnostic and is not expected to be invariant. `base` may
    carry an already computed normalized zeta = 0 sweep on `grid`.
    """
    mode = "differential" if differential else "common"
    base_cfg = cfg.replace(zeta=0.0, zeta_mode=mode)
    if base is None:
        grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
        base = sweep(base_cfg, grid=grid, workers=workers)
    elif not base.normalized:
        raise ValueError("base trace must be normalized")
    grid = base.psi_grid
    worst = 0.0
    for z in zeta_grid:
        if float(z) == 0.0:
            continue
        tr = sweep(base_cfg.replace(zeta=float(z)), grid=grid, workers=workers)
        dev = max(float(np.max(np.abs(tr.i_a - base.i_a))),
                  float(np.max(np.abs(tr.i_b - base.i_b))))
        worst = max(worst, dev)
    return worst


def fringe_metrics(
    cbw: Trace, fp: Trace, channel: str = "A", case_report: CaseReport | None = None
) -> FringeMetrics:
    peaks = find_peaks(cbw, channel)
    p_cbw = principal_peak(cbw, channel)
    p_fp = principal_peak(fp, channel)
    w_cbw, w_fp = fwhm(cbw, p_cbw), fwhm(fp, p_fp)
    return FringeMetrics(peaks, w_cbw, w_fp, w_fp / w_cbw, case_report)

