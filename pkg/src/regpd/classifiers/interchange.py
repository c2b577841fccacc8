"""ONNX backend. Needs the optional ``onnxruntime`` dependency."""

from pathlib import Path

import numpy as np

from ..errors import ShapeMismatchError, UnsupportedModelError
from .base import ClassifierHandle, as_pixels

LOGIT_TOL = 1e-2


def softmax(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


class InterchangeClassifier(ClassifierHandle):
    """Forward inference through an ONNX model with one image input.

    The input must be rank 4 with a channel axis of 3, either NCHW or NHWC.
    Samples are fed on the [0, 255] scale; any normalisation belongs inside
    the model. Outputs that do not already look like probabilities are
    passed through a softmax.
    """

    backend = "interchange"

    def __init__(self, model_path):
        try:
            import onnxruntime as ort
        except ImportError as exc:
            raise UnsupportedModelError(
                "the interchange backend needs onnxruntime (pip install 'artifact[onnx]')"
            ) from exc
        self.model_path = Path(model_path)
        if not self.model_path.is_file():
            raise FileNotFoundError(f"no such model: {self.model_path}")
        try:
            self._session = ort.InferenceSession(str(self.model_path),
                                                 providers=["CPUExecutionProvider"])
        except Exception as exc:
            raise UnsupportedModelError(f"cannot load {self.model_path}: {exc}") from exc
        inputs = self._session.get_inputs()
        if len(inputs) != 1:
            raise UnsupportedModelError(f"model has {len(inputs)} inputs, expected 1")
        self._input = inputs[0].name
        shape = list(inputs[0].shape)
        if len(shape) != 4:
            raise UnsupportedModelError(f"input rank {len(shape)}, expected 4")
        if shape[1] == 3:
            self.layout, self._hw = "NCHW", (shape[2], shape[3])
        elif shape[3] == 3:
            self.layout, self._hw = "NHWC", (shape[1], shape[2])
        else:
            raise UnsupportedModelError(f"no 3-channel axis in input shape {shape}")
        out_shape = self._session.get_outputs()[0].shape
        if not isinstance(out_shape[-1], int):
            raise UnsupportedModelError(f"output shape {out_shape} has no fixed class axis")
        super().__init__(out_shape[-1])

    def _forward(self, image):
        pixels = as_pixels(image)
        height, width = pixels.shape[:2]
        for want, got in zip(self._hw, (height, width)):
            if isinstance(want, int) and want != got:
                raise ShapeMismatchError(
                    f"model expects {self._hw[0]}x{self._hw[1]} input, got {height}x{width}"
                )
        x = pixels.astype(np.float32)[None]
        if self.layout == "NCHW":
            x = np.ascontiguousarray(x.transpose(0, 3, 1, 2))
        out = self._session.run(None, {self._input: x})[0].reshape(-1).astype(np.float64)
        if out.min() < 0.0 or abs(out.sum() - 1.0) > LOGIT_TOL:
            out = softmax(out)
        else:
            out = out / out.sum()
        return out

    def describe(self):
        return f"interchange:{self.model_path}"


def open_interchange(model_path):
    return InterchangeClassifier(model_path)
