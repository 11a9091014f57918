"""Loss-degraded and amplification-enhanced balanced homodyne tomography.

Simulates homodyne quadrature measurement of nonclassical light through
lossy (optionally phase-sensitively pre-amplified) detection chains,
reconstructs Wigner functions from the data via the characteristic-function
route, and scores the reconstructions against closed-form references.
"""

from .channels import (
    BBO_CRYSTAL,
    AmplifierParams,
    CrystalParams,
    DetectionChain,
    EffectiveLoss,
    bulk_noise_variance,
    bulk_noise_variance_layered,
    damped_char_fn,
    effective_loss,
    effective_squeezing,
)
from .errors import (
    CharFnOverflowError,
    ConfigError,
    ConvolutionMarginError,
    NumericalError,
    PdfTabulationError,
)
from .homodyne import (
    EmpiricalHistogram,
    QuadratureDataset,
    histogram,
    load_dataset,
    sample_quadratures,
    save_dataset,
    uniform_phases,
)
from .metrics import (
    QualityReport,
    fidelity_bsv,
    fidelity_numeric,
    scan_minimum,
    wigner_depth,
)
from .states import (
    StateKind,
    StateSpec,
    char_fn,
    marginal_pdf,
    marginal_variance,
    mean_photon_number,
    single_photon,
    squeezed_single_photon,
    squeezed_vacuum,
    vacuum,
    wigner,
)
from .tomography import (
    PolarCharGrid,
    ReconstructionConfig,
    WignerGrid,
    analytic_char_grid,
    blur_kernel,
    blurred_wigner_closed_form,
    closed_form_grid,
    convolve_blur,
    empirical_char_fn,
    invert_to_wigner,
    load_wigner_grid,
    recommended_xi_max,
    save_wigner_grid,
    symmetric_axis,
    unbiased_rescale,
)

__version__ = "0.1.0"
