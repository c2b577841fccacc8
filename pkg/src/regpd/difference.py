"""Comparators between the baseline score and the score without a feature."""

from dataclasses import dataclass

import numpy as np

EPS = 1e-6

_ALIASES = {
    "sub": "subtraction",
    "subtraction": "subtraction",
    "woe": "weight_of_evidence",
    "weight_of_evidence": "weight_of_evidence",
    "info": "info_difference",
    "info_difference": "info_difference",
}

SHORT_NAMES = {"subtraction": "sub", "weight_of_evidence": "woe", "info_difference": "info"}


def _clip(p):
    return np.clip(p, EPS, 1.0 - EPS)


def _log_odds(p):
    p = _clip(p)
    return np.log2(p / (1.0 - p))


@dataclass(frozen=True)
class DifferenceFunction:
    """``g(a, b)`` for baseline score ``a`` and marginal score ``b``.

    subtraction: ``a - b``; weight_of_evidence: ``log2 odds(a) - log2 odds(b)``;
    info_difference: ``log2 a - log2 b``. Log forms clip to [1e-6, 1 - 1e-6].
    """

    kind: str = "subtraction"

    def __post_init__(self):
        if self.kind not in _ALIASES:
            raise ValueError(f"unknown difference function {self.kind!r}")
        object.__setattr__(self, "kind", _ALIASES[self.kind])

    def __call__(self, a, b):
        if self.kind == "subtraction":
            out = np.subtract(a, b, dtype=np.float64)
        elif self.kind == "weight_of_evidence":
            out = _log_odds(a) - _log_odds(b)
        else:
            out = np.log2(_clip(a)) - np.log2(_clip(b))
        return float(out) if np.ndim(out) == 0 else out

    @property
    def short(self):
        return SHORT_NAMES[self.kind]


SUBTRACTION = DifferenceFunction("subtraction")
WEIGHT_OF_EVIDENCE = DifferenceFunction("weight_of_evidence")
INFO_DIFFERENCE = DifferenceFunction("info_difference")
