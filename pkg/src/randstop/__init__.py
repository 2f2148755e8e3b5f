"""Optimal stopping by regression on randomized neural network features."""

from .algos import (
    PriceEstimate,
    ThetaSchedule,
    default_hidden_size,
    discount_factor,
    price_fqi,
    price_lsm,
    price_rfqi,
    price_rlsm,
    price_rrlsm,
)
from .errors import ConfigError, DomainError, NumericalError, RandstopError, ShapeError
from .features import (
    Activation,
    PolyBasis,
    RandomBasis,
    RecurrentBasis,
    init_random_basis,
    init_recurrent_basis,
)
from .oracle import TreeSpec, bermudan_oracle, bs_european, tree_price
from .payoff import Payoff, PayoffKind
from .regress import LeastSquares, solve_ls
from .sim import (
    FbmConfig,
    GbmConfig,
    HestonConfig,
    PathSet,
    TimeGrid,
    simulate,
    simulate_fbm,
    simulate_gbm,
    simulate_heston,
)

__version__ = "0.1.0"
