"""waverc: reservoir-computing benchmarks on a nonlinear wave-lattice medium.

A 1-D damped nonlinear lattice with two drive and two probe ports stands
in for a physical wave reservoir; around it sit input encoders, virtual-
node extraction, a ridge readout, the standard nonlinear-benchmark tasks
(second-order system, NARMA2/10, delay task, digit recognition), error
and memory-capacity metrics, and a Lyapunov-spectrum estimator.
"""

from .encoding import (InputSeries, PulseTrainSpec, encode_bits, encode_rows,
                       hold_encode, mnist_to_rows, random_input)
from .lyapunov import (EmbeddingSpec, LyapunovResult, embed, estimate_jacobian,
                       lyapunov_spectrum, phase_portrait)
from .medium import (DriveSignal, FieldState, MediumConfig,
                     SimulationDivergedError, simulate, step,
                     superposition_defect)
from .metrics import (MetricsReport, accuracy, nmse, nmse_var, r_squared,
                      stm_capacity)
from .readout import ReadoutModel, predict, predict_labels, train_ridge
from .reservoir import (MinMaxSigmoid, NodeExtractionSpec, StateMatrix,
                        collect_states, normalize_and_activate)
from .tasks import (SeriesPair, TaskSpec, narma2_series, narma10_series,
                    run_mnist_task, run_prediction_task, run_stm_task,
                    second_order_series, stm_targets)

__version__ = "0.1.0"

__all__ = [
    "MediumConfig", "FieldState", "DriveSignal", "SimulationDivergedError",
    "step", "simulate", "superposition_defect",
    "PulseTrainSpec", "InputSeries", "encode_bits", "encode_rows",
    "mnist_to_rows", "random_input", "hold_encode",
    "NodeExtractionSpec", "StateMatrix", "MinMaxSigmoid", "collect_states",
    "normalize_and_activate",
    "ReadoutModel", "train_ridge", "predict", "predict_labels",
    "TaskSpec", "SeriesPair", "second_order_series", "narma2_series",
    "narma10_series", "stm_targets", "run_prediction_task", "run_stm_task",
    "run_mnist_task",
    "MetricsReport", "nmse", "nmse_var", "r_squared", "stm_capacity",
    "accuracy",
    "EmbeddingSpec", "LyapunovResult", "embed", "estimate_jacobian",
    "lyapunov_spectrum", "phase_portrait",
    "__version__",
]
