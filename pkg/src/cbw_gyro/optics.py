"""2x2 transfer matrices for beam splitters, arm phases and coupled MZIs.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype
``complex128``; field pairs are arrays of shape ``(2,)``. Port ordering is
``(A, B)`` throughout, i.e. ``(upper, lower)`` arm for phase elements.

The beam splitter follows the symmetric lossless convention in which the
reflected field picks up a factor ``i`` relative to the transmitted one.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "ARMS",
    "IDENTITY",
    "apply",
    "bs_matrix",
    "cbw_order_matrix",
    "field_pair",
    "is_unitary",
    "mzi_block",
    "phase_matrix",
    "rotation",
    "round_trip_matrix",
]

ARMS = ("upper", "lower", "both")
ZETA_MODES = ("common", "differential")

IDENTITY = np.eye(2, dtype=complex)
IDENTITY.setflags(write=False)


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def field_pair(a: complex = 1.0, b: complex = 0.0) -> np.ndarray:
    """Return the port amplitudes ``(a, b)`` as a complex vector."""
    return np.array([a, b], dtype=complex)


def bs_matrix(r_power: float = 0.5) -> np.ndarray:
    """Lossless beam splitter with power reflectance `r_power`.

    Returns ``[[t, i*rho], [i*rho, t]]`` with ``t = sqrt(1 - r_power)`` and
    ``rho = sqrt(r_power)``.
    """
    r_power = _finite("r_power", r_power)
    if not 0.0 <= r_power <= 1.0:
        raise ValueError(f"r_power must lie in [0, 1], got {r_power}")
    t = math.sqrt(1.0 - r_power)
    rho = 1j * math.sqrt(r_power)
    return np.array([[t, rho], [rho, t]], dtype=complex)


def phase_matrix(arm: str, theta: float) -> np.ndarray:
    """Phase delay `theta` on one arm (``upper``/``lower``) or on ``both``."""
    theta = _finite("theta", theta)
    e = complex(math.cos(theta), math.sin(theta))
    if arm == "upper":
        return np.array([[e, 0], [0, 1]], dtype=complex)
    if arm == "lower":
        return np.array([[1, 0], [0, e]], dtype=complex)
    if arm == "both":
        return np.array([[e, 0], [0, e]], dtype=complex)
    raise ValueError(f"arm must be one of {ARMS}, got {arm!r}")


def rotation(theta: float) -> np.ndarray:
    """Real rotation ``[[cos, -sin], [sin, cos]]`` as a complex matrix."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def mzi_block(
    sign: str, psi: float, zeta: float = 0.0, zeta_mode: str = "common"
) -> np.ndarray:
    """Balanced MZI with a Sagnac phase `psi` on one arm.

    ``sign="plus"`` places `psi` on the lower arm, ``"minus"`` on the upper
    arm, so the counter-propagating pair sees opposite relative phases.

    `zeta` is the cavity-length control phase applied after the second
    beam splitter. In the default ``"common"`` mode it acts on both arms and
    is therefore a global factor; ``"differential"`` puts it on the lower arm
    only, which is kept as a diagnostic.
    """
    psi = _finite("psi", psi)
    bs = bs_matrix(0.5)
    if sign == "plus":
        core = bs @ phase_matrix("lower", psi) @ bs
    elif sign == "minus":
        core = bs @ phase_matrix("upper", psi) @ bs
    else:
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    if zeta_mode == "common":
        return phase_matrix("both", zeta) @ core
    if zeta_mode == "differential":
        return phase_matrix("lower", zeta) @ core
    raise ValueError(f"zeta_mode must be one of {ZETA_MODES}, got {zeta_mode!r}")


def round_trip_matrix(
    psi: float, phi: float = 0.0, zeta: float = 0.0, zeta_mode: str = "common"
) -> np.ndarray:
    """One cavity round trip: ``MZI(+) . [phi] . MZI(-)``.

    The minus block acts first. `phi` is the path-length phase on the upper
    arm between the two blocks; the CBW condition requires ``phi = 2 n pi``.
    """
    return (
        mzi_block("plus", psi, zeta, zeta_mode)
        @ phase_matrix("upper", phi)
        @ mzi_block("minus", psi, zeta, zeta_mode)
    )


def cbw_order_matrix(
    psi: float, m: int, include_global_phase: bool = True
) -> np.ndarray:
    """Closed-form transfer matrix of the m-th CBW order.

    ``(-1)**m * g * R(m psi)`` with ``g = exp(i m psi)`` when
    `include_global_phase` is set and ``g = 1`` otherwise. With the global
    phase included this equals ``round_trip_matrix(psi) ** m``.
    """
    if isinstance(m, bool) or int(m) != m:
        raise TypeError(f"order must be an integer, got {m!r}")
    m = int(m)
    if m < 1:
        raise ValueError(f"CBW order must be >= 1, got {m}")
    psi = _finite("psi", psi)
    angle = m * psi
    prefactor = -1.0 if m % 2 else 1.0
    if include_global_phase:
        prefactor = prefactor * complex(math.cos(angle), math.sin(angle))
    return prefactor * rotation(angle)


def apply(matrix: np.ndarray, fields: np.ndarray) -> np.ndarray:
    """Propagate a field pair through `matrix`."""
    return np.asarray(matrix, dtype=complex) @ np.asarray(fields, dtype=complex)


def is_unitary(matrix: np.ndarray, atol: float = 1e-12) -> bool:
    matrix = np.asarray(matrix)
    return bool(np.allclose(matrix.conj().T @ matrix, IDENTITY, rtol=0, atol=atol))
