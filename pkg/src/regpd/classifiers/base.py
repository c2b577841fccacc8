import threading

import numpy as np

from ..errors import BackendError
from ..imagery import RasterImage

PROB_SUM_TOL = 1e-4


def as_pixels(image):
    if isinstance(image, RasterImage):
        return image.pixels
    return np.asarray(image, dtype=np.float32)


def check_probabilities(probs, num_classes):
    """Validate a backend output as a probability vector; returns float64 copy."""
    probs = np.asarray(probs, dtype=np.float64).reshape(-1)
    if probs.shape[0] != num_classes:
        raise BackendError(f"expected {num_classes} probabilities, got {probs.shape[0]}")
    if not np.all(np.isfinite(probs)) or probs.min() < 0.0 or probs.max() > 1.0:
        raise BackendError(f"probabilities outside [0, 1]: {probs}")
    if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
        raise BackendError(f"probabilities sum to {probs.sum():.6f}, not 1")
    return probs


class ClassifierHandle:
    """Black-box scorer ``image -> class probabilities`` with a call counter.

    Subclasses implement :meth:`_forward`. The counter is bumped before the
    backend runs, so failed calls are counted too.
    """

    backend = "abstract"

    def __init__(self, num_classes):
        if num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        self.num_classes = int(num_classes)
        self._calls = 0
        self._count_lock = threading.Lock()

    @property
    def calls(self):
        return self._calls

    def reset(self):
        with self._count_lock:
            self._calls = 0

    def predict(self, image):
        with self._count_lock:
            self._calls += 1
        return check_probabilities(self._forward(image), self.num_classes)

    __call__ = predict

    def _forward(self, image):
        raise NotImplementedError

    def describe(self):
        return self.backend

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class FunctionClassifier(ClassifierHandle):
    """Wrap a plain callable. Used for tabular models and ad-hoc tests."""

    backend = "function"

    def __init__(self, func, num_classes):
        super().__init__(num_classes)
        self.func = func

    def _forward(self, x):
        return self.func(x)


def call_count(handle):
    return handle.calls
