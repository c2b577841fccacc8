from .base import ClassifierHandle, FunctionClassifier, call_count, check_probabilities
from .external import ExternalClassifier, open_external
from .interchange import InterchangeClassifier, open_interchange
from .synthetic import AreaFractionOracle, Blob, ConstantOracle, TwoBlobOracle, color_fraction

__all__ = [
    "AreaFractionOracle",
    "Blob",
    "ClassifierHandle",
    "ConstantOracle",
    "ExternalClassifier",
    "FunctionClassifier",
    "InterchangeClassifier",
    "TwoBlobOracle",
    "call_count",
    "check_probabilities",
    "color_fraction",
    "open_external",
    "open_interchange",
]
