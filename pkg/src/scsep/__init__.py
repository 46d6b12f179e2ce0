"""Spin-charge separation of slow-light polaritons: parameters, spectra and mean-field dynamics."""
from .params import (
    EffectiveLiebLiniger,
    LuttingerParameters,
    OpticalConfig,
    RegimeReport,
    check_repulsive,
    check_separation,
    derive_effective,
    derive_luttinger,
    invert_luttinger,
)
from .specfun import QuadratureSpec, appell_f1, gamma_fn, hyp2f1
from .spectral import (
    SpectrumGrid,
    SpectrumRequest,
    density_spectrum_grid,
    density_spectrum_point,
    extract_peaks,
    velocities_from_sweep,
)

__version__ = "0.1.0"
