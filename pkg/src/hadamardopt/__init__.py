"""Higher-order lower Hadamard derivatives and the optimality conditions built on them."""
from .classify import (Kind, Tolerances, Verdict, fn_class_probe, isolated_min_check,
                       necessary_conditions, stationary_scan, strict_min_certificate)
from .config import Settings, load_settings, parse_settings
from .errors import HadamardOptError
from .estimators import HadamardDerivative, OptimalityClassifier
from .extreal import NEG_INF, POS_INF, ExtReal
from .funcspace import (DEFAULT_CORPUS, DerivativeChain, HomogeneousForm, ScalarField, corpus_get,
                        tensor_chain, tensor_form, zero_chain)
from .hadamard import (delta_n, hadamard_derivative, subdiff_contains, subdiff_interval_1d,
                       taylor_consistency_check)
from .limits import LiminfEstimate, ShellConfig, liminf1, liminf2
from .oracle import oracle_global_min, oracle_isolated_order, oracle_local_min
from .rivals import bz_second, dini_derivative, ginchev_derivative, lstability_probe

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CORPUS", "DerivativeChain", "ExtReal", "HadamardDerivative", "HadamardOptError",
    "HomogeneousForm", "Kind", "LiminfEstimate", "NEG_INF", "OptimalityClassifier", "POS_INF",
    "ScalarField", "Settings", "ShellConfig", "Tolerances", "Verdict", "bz_second", "corpus_get",
    "delta_n", "dini_derivative", "fn_class_probe", "ginchev_derivative", "hadamard_derivative",
    "isolated_min_check", "liminf1", "liminf2", "load_settings", "lstability_probe",
    "necessary_conditions", "oracle_global_min", "oracle_isolated_order", "oracle_local_min",
    "parse_settings", "stationary_scan", "strict_min_certificate", "subdiff_contains",
    "subdiff_interval_1d", "taylor_consistency_check", "tensor_chain", "tensor_form", "zero_chain",
]
