"""Exact, semiclassical and mean-field dynamics of interacting bosons on small lattices."""

__version__ = "0.1.0"

from .basis import (
    FockBasis,
    LatticeParams,
    apply,
    assemble_hamiltonian,
    build_basis,
    diagonal_energies,
    occupation_operator,
)
from .config import RunConfig, config_hash, load_config, parse_config, validate_config
from .dynamics import (
    TimeSeries,
    autocorrelation,
    cbs_experiment,
    otoc,
    otoc_multisector,
    transition_probability,
)
from .errors import CapacityError, ConfigError, NumericError, PropagationError
from .meanfield import (
    LyapunovEstimate,
    fixed_point,
    lyapunov_benettin,
    stability_exponents,
    tangent_map,
)
from .propagate import Spectrum, diagonalize, propagate
from .rwm import (
    CovarianceMatrix,
    SpectralWindow,
    classical_dos,
    exact_covariance,
    normalized_correlator,
    sample_amplitudes,
    semiclassical_covariance,
)
from .spectral import (
    disorder_realizations,
    form_factor,
    goe_form_factor,
    ramp_slope,
    unfold,
)
from .states import coherent_state, fock_state
from .twa import twa_return_probability
