"""Simulation and fringe analysis of a coherence-de-Broglie-wave ring gyroscope."""

__version__ = "0.1.0"

from .cavity import (  # noqa: E402
    CavityConfig,
    FieldPair,
    ModeTrace,
    Trace,
    mode_amplitudes,
    mode_traces,
    superpose,
    sweep,
)
from .fringes import (  # noqa: E402
    AnalysisError,
    find_peaks,
    fwhm,
    resolution_gain,
    verify_paper_cases,
    zeta_invariance,
)
from .optics import (  # noqa: E402
    apply,
    bs_matrix,
    cbw_order_matrix,
    mzi_block,
    phase_matrix,
    rotation,
    round_trip_matrix,
)
from .reference import FabryPerotConfig, SagnacParams, fp_trace, sagnac_phase  # noqa: E402
