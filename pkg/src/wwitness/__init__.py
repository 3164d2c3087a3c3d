"""Entanglement witnesses for W states emitted by four-pump polariton cavities."""
from .fockstate import DensityOperator, PureState, partial_trace, w_state
from .partitions import ModePartition, enumerate_partitions
from .witness import MaxGConfig, WWeights, f_full, f_part, max_g
from .losschannel import Efficiencies, apply_loss, lhs_trace, purify, sweep_eta
from .oracle import OracleConfig, max_product_expectation
from .classify import classify_state, locate_entangled_subsets
from .estimators import LossChannel, ProductStateOracle, WWitness

__version__ = "0.1.0"

__all__ = [
    "DensityOperator", "PureState", "partial_trace", "w_state",
    "ModePartition", "enumerate_partitions",
    "MaxGConfig", "WWeights", "f_full", "f_part", "max_g",
    "Efficiencies", "apply_loss", "lhs_trace", "purify", "sweep_eta",
    "OracleConfig", "max_product_expectation",
    "classify_state", "locate_entangled_subsets",
    "LossChannel", "ProductStateOracle", "WWitness",
]
