"""Classical baselines: Fabry-Perot Airy fringe and the Sagnac phase."""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .cavity import Trace

__all__ = [
    "SPEED_OF_LIGHT",
    "FabryPerotConfig",
    "SagnacParams",
    "coefficient_of_finesse",
    "fp_fwhm",
    "fp_trace",
    "sagnac_phase",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact


@dataclasses.dataclass(frozen=True)
class FabryPerotConfig:
    """Mirror amplitude reflection `r` and resonance position `center`."""

    r: float = 0.999
    center: float = math.pi

    def __post_init__(self):
        if not (0.0 < self.r < 1.0):
            raise ValueError(f"Fabry-Perot r must lie in (0, 1), got {self.r}")
        if not math.isfinite(self.center):
            raise ValueError("center must be finite")

    @property
    def reflectance(self) -> float:
        return self.r * self.r


@dataclasses.dataclass(frozen=True)
class SagnacParams:
    """Ring area (m^2), wavelength (m) and rotation rate (rad/s)."""

    area: float
    wavelength: float
    omega: float = 0.0

    def __post_init__(self):
        if not self.area > 0:
            raise ValueError(f"area must be positive, got {self.area}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not math.isfinite(self.omega):
            raise ValueError("omega must be finite")


def coefficient_of_finesse(reflectance: float) -> float:
    return 4.0 * reflectance / (1.0 - reflectance) ** 2


def fp_trace(cfg: FabryPerotConfig, grid) -> Trace:
    """Airy transmission ``1 / (1 + F sin^2((psi - center) / 2))`` on port A.

    Port B carries the reflected complement ``1 - I_A``. The peak is 1 by
    construction, so the trace is flagged as normalized.
    """
    psi = np.asarray(grid, dtype=float)
    F = coefficient_of_finesse(cfg.reflectance)
    i_a = 1.0 / (1.0 + F * np.sin((psi - cfg.center) / 2.0) ** 2)
    return Trace(psi, i_a, 1.0 - i_a, normalized=True, meta=cfg)


def fp_fwhm(cfg: FabryPerotConfig) -> float:
    """Exact FWHM of the Airy peak, ``4 arcsin(1 / sqrt(F))``."""
    return 4.0 * math.asin(1.0 / math.sqrt(coefficient_of_finesse(cfg.reflectance)))


def sagnac_phase(p: SagnacParams) -> float:
    """Sagnac phase ``8 pi A Omega / (lambda c)`` between counter-propagating beams."""
    return 8.0 * math.pi * p.area * p.omega / (p.wavelength * SPEED_OF_LIGHT)
