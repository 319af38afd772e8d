"""Direction-of-arrival estimation for uniform linear arrays.

Covers snapshot simulation, delay-and-sum and Capon spectra, MUSIC,
Root-MUSIC, TLS-ESPRIT and AIC/MDL source enumeration.
"""

from .array_model import ArrayGeometry, manifold_matrix, phase_shift, steering_vector
from .beamformers import (
    SpectrumTrace,
    capon_spectrum,
    default_grid,
    delay_and_sum_spectrum,
    peak_width,
    prominent_peaks,
)
from .covariance import (
    EigenSystem,
    HermitianCovariance,
    Smoothing,
    eigendecompose,
    forward_backward_average,
    sample_covariance,
    spatial_smoothing,
)
from .enumeration import EnumerationResult, aic, mdl, penalty
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    DoaError,
    DomainError,
    EstimationError,
    SingularityError,
    UnderresolvedError,
    UsageError,
)
from .signal_sim import (
    ScenarioSpec,
    SnapshotMatrix,
    SourceSpec,
    model_covariance,
    noise_variance,
    simulate,
    source_covariance,
)
from .subspace import (
    DoaEstimates,
    SubspaceSplit,
    esprit_tls,
    find_peaks,
    music_spectrum,
    recover_signal_covariance,
    root_music,
    root_music_roots,
    split_subspaces,
)

__version__ = "0.1.0"
