from . import ops
from .gradcheck import GradCheckReport, grad_check, relative_error
from .layers import Linear, LSTMParams, ParameterStore, lstm_step
from .optim import grad_norm, sgd_step
from .tensor import Parameter, Tape, Tensor, active_tape, float64_mode, get_dtype, no_tape
