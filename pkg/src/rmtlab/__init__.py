"""Linear eigenvalue statistics of random matrices: sampling, limit laws and CLT variances."""
from .ensembles import EnsembleSpec
from .entrydist import EntryDistribution
from .laws import LimitLaw, marchenko_pastur, semicircle
from .montecarlo import ExperimentConfig, clt_report, run_experiment
from .testfns import TestFunction, builtin
from .variance import VarianceError, VarianceResult, theory_variance

__version__ = "0.1.0"

__all__ = [
    "EnsembleSpec", "EntryDistribution", "ExperimentConfig", "LimitLaw", "TestFunction",
    "VarianceError", "VarianceResult", "builtin", "clt_report", "marchenko_pastur",
    "run_experiment", "semicircle", "theory_variance",
]
