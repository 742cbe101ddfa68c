"""Energy-limited joint source-channel coding with analog pulse-position modulation."""

from .bounds import (
    BoundReport,
    ChainVerdict,
    OptimizedBound,
    ReferenceCurves,
    appendix_chain_check,
    gaussian_bound,
    gaussian_optimized,
    q_function,
    reference_curves,
    uniform_bound,
    uniform_optimized,
)
from .channel import (
    ChannelGrid,
    CorrelationProfile,
    NoiseRealization,
    correlation_profile,
    draw_noise,
    trial_rng,
)
from .receivers import Estimate, detect_digital_ppm, map_gaussian, ml_uniform
from .signal import (
    OverflowSupport,
    PpmConfig,
    SampledWaveform,
    SourceKind,
    SourceModel,
    modulate,
    pulse_autocorr,
    rect_pulse,
)

__version__ = "0.1.0"
