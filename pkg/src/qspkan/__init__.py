"""Statevector simulation and training of quantum KAN layers built from QSP circuits."""
from .errors import (
    CapError,
    DomainError,
    InvalidInput,
    NoConvergence,
    ParityError,
    QspKanError,
    ZeroProbability,
)
from .layer import LayerOutput, LayerParams, build_block_diagonal, layer_forward, mixing_coefficients
from .qsp import (
    FitReport,
    QspResponse,
    SolverOptions,
    interpolate_p,
    phase_gate,
    prob_response,
    qsp_unitary,
    real_response,
    response,
    signal_operator,
    solve_phases,
)
from .readout import hadamard_test, swap_test
from .sim import StateVector, apply_gate, apply_hadamard_layer, make_state, overlap, postselect, sample, tensor
from .stack import (
    QubitizedUnit,
    StackLayerSpec,
    StackSpec,
    apply_phase_layer,
    encode_signal,
    qubitize,
    stack_forward,
    stack_layer_forward,
    unit_forward,
)
from .training import Dataset, OptimizerConfig, TrainRecord, gradient, mse_loss, train

__version__ = "0.1.0"
