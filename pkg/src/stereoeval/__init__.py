"""stereoeval: evaluation toolkit for spatially-aware stereo audio.

Subpackages cover WAV I/O, RMS envelopes and the E-L1 metric, Frechet
embedding distances, spatial audio/video alignment scoring, denoising
diffusion sampling math, and a reference bbox-driven stereo renderer.
"""

__version__ = "0.1.0"

from .audio_io import StereoBuffer, read_wav, write_wav, linear_resample, to_mono
from .envelope import Envelope, rms_envelope, interpolate_envelope, e_l1
from .embedding_metrics import (
    EmbeddingSet,
    GaussianStats,
    fit_gaussian,
    sqrtm_psd,
    frechet_distance,
    load_embeddings,
    save_embeddings,
)
from .track_io import (
    BBoxTrack,
    TrackEntry,
    AlignmentReport,
    load_track,
    write_track,
    bbox_center_x_normalized,
    write_report,
    load_report,
)
from .spatial_align import (
    DirectionTrack,
    DirectionWindow,
    detect_events,
    estimate_direction,
    localize,
    spatial_av_align,
)
from .diffusion_core import (
    NoiseSchedule,
    LatentState,
    ConditioningBundle,
    make_schedule,
    constant_schedule,
    forward_step,
    forward_sample,
    posterior_mean,
    posterior_variance,
    reverse_sample,
    v_target,
    v_to_eps,
)
from .spatial_render import (
    RenderConfig,
    constant_power_gains,
    pan_curve,
    render_stereo,
)
