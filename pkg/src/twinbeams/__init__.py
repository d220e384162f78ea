"""Simulator and analysis toolkit for quantum-correlated twin beams carrying
orbital angular momentum, produced by four-wave mixing in hot atomic vapor.

Covers both the amplifying regime and the nonamplifying "quantum beam
splitter" regime: Gaussian-state noise propagation, vapor-cell channel
models, gain-vs-detuning curves, Laguerre-Gaussian beam imaging, and a
balanced-detection model with an attenuation optimizer.
"""

__version__ = "0.1.0"

from .gaussian import (
    GaussianState,
    ModeLabel,
    SqueezerSpec,
    beamsplit_loss,
    displace,
    intensity_difference_nsf,
    mean_photon_flux,
    second_moments,
    single_beam_nsf,
    two_mode_squeeze,
    vacuum_state,
)
from .channels import (
    CascadeSpec,
    FitResult,
    GainPair,
    LumpedChannelSpec,
    apply_cascade,
    apply_channel,
    apply_lumped_channel,
    channel_gains,
    channel_nsf,
    fit_balanced_efficiency,
    fit_channel,
)
from .gaincurves import (
    GainCurveModel,
    gain_curves,
    nonamplifying_window,
)
from .detection import (
    DetectionChain,
    NoiseMeasurement,
    from_decibel,
    measure_noise,
    optimize_probe_attenuation,
    to_decibel,
)
from .montecarlo import mc_nsf_oracle
from .oam import (
    FieldMap,
    ImageGrid,
    LGModeSpec,
    check_oam_conservation,
    fork_dislocation_order,
    interfere_plane_wave,
    lg_field,
    topological_charge,
)
