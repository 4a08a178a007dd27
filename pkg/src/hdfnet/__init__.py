"""Two-stage hierarchical deep-filtering speech enhancement engine."""

from .spectral import (
    ComplexSpectrogram,
    StftParams,
    Waveform,
    build_feature_stack,
    compress,
    istft,
    stft,
)
from .erb import ErbFilterbank, build_erb_filterbank, erb_analyze, erb_synthesize
from .filtering import (
    FilterCoeffs,
    FilterSpec,
    SbfSpec,
    apply_crm,
    apply_df,
    apply_fdf,
    apply_filter,
    apply_tdf,
    sbf_expand,
)
from .losses import LossConfig, comp_loss, mag_loss, si_sdr, total_loss
from .model import (
    ModelConfig,
    WeightBundle,
    WeightValidationError,
    hdf_enhance,
    init_random_weights,
    macs_per_second,
    param_count,
    tacrn_forward,
)
from .bundle import DigestMismatchError, load_weights, save_weights
from .runconfig import RunConfig, load_run_config, save_run_config
from .wavio import read_wav, write_wav

__version__ = "0.1.0"
