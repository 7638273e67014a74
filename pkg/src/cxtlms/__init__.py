"""Complex-valued adaptive Hammerstein identification with low-rank tensor lookup tables."""
from .architectures import (
    ARCHITECTURES,
    CTLMS,
    TLMS,
    TLMS2R,
    TTLMS,
    NumericalError,
    RunTrace,
    StepOutput,
    TapDelayLine,
    aposteriori_error_estimate,
    c2r_split,
    tensor_step_size,
)
from .complexity import OpCount, complexity_estimate, count_forward
from .filters import LmsState, clms_update, lms_predict, nlms_update
from .scenario import (
    ScenarioConfig,
    gen_colored_noise,
    mse_curve,
    pa_nonlinearity,
    run_monte_carlo,
    simulate_run,
    simulate_target,
    synth_duplexer,
)
from .tensor import CpdTensor, Discretizer, cpd_eval, dense_materialize, discretize, hadamard_excluding

__version__ = "0.1.0"
