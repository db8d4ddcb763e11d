from .adam import Adam
from .autodiff import (
    ContractError,
    DimensionError,
    Expr,
    Parameter,
    backward,
    constant,
    no_grad,
    numeric_gradient,
)
from .layers import LSTM, MLP, LstmState
from .params import ParamStore, init_parameters
from .serialize import (
    FormatError,
    ModelFileError,
    ShapeMismatchError,
    TruncatedError,
    VersionError,
    load_params,
    save_params,
)
