"""Lossy superposition of CBW orders inside the ring cavity.

Each round trip adds one more pass through the coupled-MZI block, so the
field leaving the cavity is the weighted sum over orders ``m = 1..M`` of the
order-m output, with weight ``r ** (loss_exponent * m)``.

Two evaluation routes exist:

* the closed-form route, used whenever ``phi`` is a multiple of ``2 pi`` and
  ``zeta`` is common-mode, evaluates ``(-1)^m cos(m psi)`` / ``sin(m psi)``
  order by order;
* the matrix route propagates the input through successive powers of the
  full round-trip matrix. It covers ``phi != 0`` and the differential-zeta
  diagnostic, and reduces to the closed form otherwise.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Sequence

import numpy as np

from .optics import ZETA_MODES, round_trip_matrix

__all__ = [
    "CavityConfig",
    "FieldPair",
    "ModeTrace",
    "Trace",
    "default_grid",
    "mode_amplitudes",
    "mode_traces",
    "mode_weight",
    "superpose",
    "sweep",
]

CONVENTIONS = ("eq2", "summation-text")

# Orders between exact re-evaluations of exp(i m psi) in the phasor recurrence;
# bounds the accumulated rounding error to ~ANCHOR_EVERY ulps.
ANCHOR_EVERY = 32

DEFAULT_STEPS = 40001


@dataclasses.dataclass(frozen=True)
class CavityConfig:
    """Summation and sweep parameters for the ring cavity.

    Attributes
    ----------
    r : float
        Amplitude retained per round trip, ``0 < r <= 1``.
    max_order : int
        Highest CBW order ``M`` included in the sum.
    loss_exponent : {1, 2}
        Order ``m`` is weighted by ``r ** (loss_exponent * m)``.
    include_global_phase : bool
        Keep the per-order factor ``exp(i m (psi + 2 zeta))``. Off by default;
        the destructive cases at ``psi = pi/2`` only hold without it.
    channel_convention : {"eq2", "summation-text"}
        ``eq2`` puts ``cos(m psi)`` on port A; ``summation-text`` swaps the
        trig functions between the ports.
    phi, zeta : float
        Path-length phase between the MZI blocks and cavity-length phase.
    zeta_mode : {"common", "differential"}
        How `zeta` enters each MZI block (see :func:`optics.mzi_block`).
    input_amplitude : float
        ``E_0``.
    """

    r: float = 0.999
    max_order: int = 5000
    loss_exponent: int = 1
    include_global_phase: bool = False
    channel_convention: str = "eq2"
    phi: float = 0.0
    zeta: float = 0.0
    zeta_mode: str = "common"
    input_amplitude: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.r <= 1.0):
            raise ValueError(f"r must lie in (0, 1], got {self.r}")
        if isinstance(self.max_order, bool) or int(self.max_order) != self.max_order:
            raise TypeError(f"max_order must be an integer, got {self.max_order!r}")
        if self.max_order < 1:
            raise ValueError(f"max_order must be >= 1, got {self.max_order}")
        if self.loss_exponent not in (1, 2):
            raise ValueError(f"loss_exponent must be 1 or 2, got {self.loss_exponent}")
        if self.channel_convention not in CONVENTIONS:
            raise ValueError(
                f"channel_convention must be one of {CONVENTIONS}, "
                f"got {self.channel_convention!r}"
            )
        if self.zeta_mode not in ZETA_MODES:
            raise ValueError(f"zeta_mode must be one of {ZETA_MODES}, got {self.zeta_mode!r}")
        for name in ("r", "phi", "zeta", "input_amplitude"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes) -> "CavityConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def closed_form(self) -> bool:
        """True when the per-order closed form applies (phi = 2 n pi, common zeta)."""
        return self.zeta_mode == "common" and math.fmod(self.phi, 2 * math.pi) == 0.0


class FieldPair(NamedTuple):
    """Complex amplitudes at ports A (detector D1) and B (detector D2)."""

    a: np.ndarray
    b: np.ndarray


@dataclasses.dataclass(frozen=True)
class Trace:
    """Intensities of both output ports over a phase grid."""

    psi_grid: np.ndarray
    i_a: np.ndarray
    i_b: np.ndarray
    normalized: bool = False
    meta: object = None

    def __post_init__(self):
        psi = np.asarray(self.psi_grid, dtype=float)
        if psi.ndim != 1 or psi.size < 2:
            raise ValueError("psi_grid must be a 1-D array with at least 2 points")
        if np.any(np.diff(psi) <= 0):
            raise ValueError("psi_grid must be strictly increasing")
        if np.shape(self.i_a) != psi.shape or np.shape(self.i_b) != psi.shape:
            raise ValueError("intensity arrays must match psi_grid")

    def channel(self, name: str) -> np.ndarray:
        if name.upper() == "A":
            return self.i_a
        if name.upper() == "B":
            return self.i_b
        raise ValueError(f"channel must be 'A' or 'B', got {name!r}")

    def normalize(self) -> "Trace":
        """Divide both channels by their common maximum."""
        peak = max(float(np.max(self.i_a)), float(np.max(self.i_b)))
        if peak <= 0.0:
            return dataclasses.replace(self, normalized=True)
        return dataclasses.replace(
            self, i_a=self.i_a / peak, i_b=self.i_b / peak, normalized=True
        )


@dataclasses.dataclass(frozen=True)
class ModeTrace:
    """Signed real amplitude of one order over the grid (global phase excluded)."""

    order: int
    psi_grid: np.ndarray
    amp_a: np.ndarray
    amp_b: np.ndarray


def default_grid(
    psi_min: float = -2 * math.pi, psi_max: float = 2 * math.pi, steps: int = DEFAULT_STEPS
) -> np.ndarray:
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if not psi_min < psi_max:
        raise ValueError(f"need psi_min < psi_max, got {psi_min}, {psi_max}")
    return np.linspace(psi_min, psi_max, int(steps))


def mode_weight(m: int, cfg: CavityConfig) -> float:
    return cfg.r ** (cfg.loss_exponent * m)


def _sign(m: int) -> float:
    return -1.0 if m % 2 else 1.0


def _strip_factor(psi, cfg: CavityConfig):
    """Per-round-trip phase removed when the global phase is switched off."""
    zeta_common = cfg.zeta if cfg.zeta_mode == "common" else 0.0
    return np.exp(-1j * (np.asarray(psi, dtype=float) + 2 * zeta_common))


def mode_amplitudes(m: int, psi, cfg: CavityConfig) -> tuple:
    """Weighted output amplitudes ``(amp_a, amp_b)`` of order `m` at `psi`.

    `psi` may be a scalar or an array; results are complex.
    """
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"order must be a positive integer, got {m!r}")
    if m > cfg.max_order:
        raise ValueError(f"order {m} exceeds max_order {cfg.max_order}")
    scale = mode_weight(m, cfg) * cfg.input_amplitude
    psi_arr = np.asarray(psi, dtype=float)

    if cfg.closed_form:
        angle = m * psi_arr
        cos_, sin_ = np.cos(angle), np.sin(angle)
        if cfg.channel_convention == "summation-text":
            cos_, sin_ = sin_, cos_
        coef = scale * _sign(m) * np.ones_like(angle, dtype=complex)
        if cfg.include_global_phase:
            coef = coef * np.exp(1j * m * (psi_arr + 2 * cfg.zeta))
        return coef * cos_, coef * sin_

    flat = np.atleast_1d(psi_arr).ravel()
    out = np.empty((flat.size, 2), dtype=complex)
    for k, p in enumerate(flat):
        mat = np.linalg.matrix_power(
            round_trip_matrix(p, cfg.phi, cfg.zeta, cfg.zeta_mode), m
        )
        out[k] = mat[:, 0]
    if not cfg.include_global_phase:
        out *= (_strip_factor(flat, cfg) ** m)[:, None]
    if cfg.channel_convention == "summation-text":
        out = out[:, ::-1]
    out *= scale
    a = out[:, 0].reshape(psi_arr.shape)
    b = out[:, 1].reshape(psi_arr.shape)
    return (a, b) if psi_arr.ndim else (a[()], b[()])


def _sum_closed_form(psi: np.ndarray, cfg: CavityConfig) -> tuple:
    c1 = np.exp(1j * psi)
    c = np.empty(psi.shape, dtype=complex)
    term = np.empty(psi.shape, dtype=complex)
    swap = cfg.channel_convention == "summation-text"

    if not cfg.include_global_phase:
        # real coefficients: one complex accumulator holds the cos sum (real
        # part) and the sin sum (imaginary part)
        acc = np.zeros(psi.shape, dtype=complex)
        for m in range(1, cfg.max_order + 1):
            if (m - 1) % ANCHOR_EVERY == 0:
                np.exp(1j * (m * psi), out=c)
            else:
                np.multiply(c, c1, out=c)
            np.multiply(c, mode_weight(m, cfg) * _sign(m) * cfg.input_amplitude, out=term)
            acc += term
        cos_sum, sin_sum = acc.real.copy(), acc.imag.copy()
        if swap:
            cos_sum, sin_sum = sin_sum, cos_sum
        return cos_sum.astype(complex), sin_sum.astype(complex)

    acc_a = np.zeros(psi.shape, dtype=complex)
    acc_b = np.zeros(psi.shape, dtype=complex)
    for m in range(1, cfg.max_order + 1):
        if (m - 1) % ANCHOR_EVERY == 0:
            np.exp(1j * (m * psi), out=c)
        else:
            np.multiply(c, c1, out=c)
        coef = mode_weight(m, cfg) * _sign(m) * cfg.input_amplitude
        zeta_phase = complex(math.cos(2 * m * cfg.zeta), math.sin(2 * m * cfg.zeta))
        np.multiply(c, coef * zeta_phase, out=term)
        cos_, sin_ = (c.imag, c.real) if swap else (c.real, c.imag)
        acc_a += term * cos_
        acc_b += term * sin_
    return acc_a, acc_b


def _sum_matrix_route(psi: np.ndarray, cfg: CavityConfig) -> tuple:
    mats = np.array([round_trip_matrix(p, cfg.phi, cfg.zeta, cfg.zeta_mode) for p in psi])
    if not cfg.include_global_phase:
        mats = mats * _strip_factor(psi, cfg)[:, None, None]
    b00, b01, b10, b11 = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    va = np.full(psi.shape, cfg.input_amplitude, dtype=complex)
    vb = np.zeros(psi.shape, dtype=complex)
    acc_a = np.zeros(psi.shape, dtype=complex)
    acc_b = np.zeros(psi.shape, dtype=complex)
    for m in range(1, cfg.max_order + 1):
        va, vb = b00 * va + b01 * vb, b10 * va + b11 * vb
        w = mode_weight(m, cfg)
        acc_a += w * va
        acc_b += w * vb
    if cfg.channel_convention == "summation-text":
        acc_a, acc_b = acc_b, acc_a
    return acc_a, acc_b


def superpose(psi, cfg: CavityConfig) -> FieldPair:
    """Sum the weighted order amplitudes for ``m = 1..cfg.max_order``.

    Accepts a scalar or array `psi`. Each grid point is computed
    independently, so splitting the grid never changes a result bit.
    """
    psi_arr = np.asarray(psi, dtype=float)
    flat = np.atleast_1d(psi_arr).ravel()
    if cfg.closed_form:
        a, b = _sum_closed_form(flat, cfg)
    else:
        a, b = _sum_matrix_route(flat, cfg)
    if psi_arr.ndim == 0:
        return FieldPair(a[0], b[0])
    return FieldPair(a.reshape(psi_arr.shape), b.reshape(psi_arr.shape))


def sweep(
    cfg: CavityConfig,
    psi_min: float = -2 * math.pi,
    psi_max: float = 2 * math.pi,
    steps: int = DEFAULT_STEPS,
    *,
    grid: np.ndarray | None = None,
    normalize: bool = True,
    workers: int = 1,
) -> Trace:
    """Port intensities ``|E_A|^2``, ``|E_B|^2`` over a uniform phase grid.

    With ``workers > 1`` the grid is split into contiguous chunks evaluated on
    a thread pool and reassembled by index; the output is bit-identical to
    the serial result.
    """
    psi = default_grid(psi_min, psi_max, steps) if grid is None else np.asarray(grid, float)
    if workers <= 1:
        fields = superpose(psi, cfg)
        a, b = fields.a, fields.b
    else:
        chunks = np.array_split(psi, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda chunk: superpose(chunk, cfg), chunks))
        a = np.concatenate([p.a for p in parts])
        b = np.concatenate([p.b for p in parts])
    trace = Trace(psi, np.abs(a) ** 2, np.abs(b) ** 2, normalized=False, meta=cfg)
    return trace.normalize() if normalize else trace


def mode_traces(orders: Sequence[int], cfg: CavityConfig, grid) -> list:
    """Per-order real amplitude curves with the global phase removed."""
    grid = np.asarray(grid, dtype=float)
    plain = cfg.replace(include_global_phase=False)
    traces = []
    for m in orders:
        a, b = mode_amplitudes(int(m), grid, plain)
        traces.append(ModeTrace(int(m), grid, np.real(a), np.real(b)))
    return traces

