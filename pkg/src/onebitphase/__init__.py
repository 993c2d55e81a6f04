"""Data-aided phase noise tracking for 1-bit quantized, oversampled receivers.

Library layout:
  framing      pilot/data frame construction, RLL streams, block indexing
  waveform     pulse shaping and the data-aided reference signal
  impairments  phase noise synthesis, AWGN channel, 1-bit quantization
  specfun      numerically stable special functions
  estimators   LS, EM and damped Fisher-scoring pilot-block estimators
  tracking     Kalman filter / RTS smoother over the block phase random walk
  experiments  Monte Carlo harness, sweeps, CSV output
  plotting     figure rendering for sweep results
  validation   independent oracle checks (also behind `onebitphase validate`)
"""

from .estimators import (
    ALGORITHMS,
    EstimatorSettings,
    FisherInfoParams,
    PilotBlockView,
    em_estimate,
    em_noise_expectation,
    fisher_info_inv,
    ls_estimate,
    score,
    scoring_estimate,
)
from .experiments import (
    MODES,
    ExperimentConfig,
    SweepResult,
    ftn_config,
    run_sweep,
    run_trial,
)
from .framing import FrameConfig, SymbolFrame, build_frame, generate_rll_stream
from .impairments import (
    PhaseNoiseParams,
    PhaseTrajectory,
    apply_channel,
    generate_phase,
    quantize_1bit,
    stapn,
)
from .tracking import (
    BlockObservationSeq,
    StapnModel,
    TrackOutput,
    build_model,
    kalman_forward,
    rts_smooth,
)
from .waveform import PulseShape, ReferenceSignal, make_pulse, modulate

__version__ = "0.1.0"
