"""Regenerate the files under src/regpd/data/.

    python scripts/build_assets.py

Needs the ``assets`` extra (onnx) for the tiny interchange models. Expected
outputs of those models are computed here with plain numpy, independently of
any ONNX runtime.
"""

import json
from pathlib import Path

import numpy as np

from regpd.imagery import save_image, save_mask
from regpd.scenes import disk_image, two_blob_image, two_blob_params, write_corpus

DATA = Path(__file__).resolve().parents[1] / "src" / "regpd" / "data"
MODEL_SIDE = 8


def build_scenes():
    image, mask = disk_image(64)
    save_image(image, DATA / "disk.png")
    save_mask(mask, DATA / "disk_mask.png")
    image, a, b = two_blob_image(64)
    save_image(image, DATA / "two_blob.png")
    save_mask(a, DATA / "two_blob_a.png")
    save_mask(b, DATA / "two_blob_b.png")
    params = [{"color": list(c), "tolerance": t, "reference_fraction": r}
              for c, t, r in two_blob_params(64)]
    (DATA / "two_blob.json").write_text(json.dumps({"blobs": params}, indent=2) + "\n")
    write_corpus(DATA / "corpus", count=20, size=64, seed=0)


def build_models():
    import onnx
    from onnx import TensorProto, helper, numpy_helper

    rng = np.random.default_rng(2024)
    n_in = 3 * MODEL_SIDE * MODEL_SIDE
    weights = rng.normal(0.0, 2e-3, size=(n_in, 2)).astype(np.float32)
    bias = np.array([0.25, -0.25], dtype=np.float32)

    def model(with_softmax):
        nodes = [
            helper.make_node("Flatten", ["image"], ["flat"], axis=1),
            helper.make_node("Gemm", ["flat", "W", "b"], ["logits" if with_softmax else "scores"]),
        ]
        if with_softmax:
            nodes.append(helper.make_node("Softmax", ["logits"], ["scores"], axis=1))
        graph = helper.make_graph(
            nodes, "tiny_linear",
            [helper.make_tensor_value_info("image", TensorProto.FLOAT,
                                           [1, 3, MODEL_SIDE, MODEL_SIDE])],
            [helper.make_tensor_value_info("scores", TensorProto.FLOAT, [1, 2])],
            initializer=[numpy_helper.from_array(weights, "W"),
                         numpy_helper.from_array(bias, "b")],
        )
        m = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 13)])
        m.ir_version = 8
        onnx.checker.check_model(m)
        return m

    onnx.save(model(False), DATA / "tiny_linear_logits.onnx")
    onnx.save(model(True), DATA / "tiny_linear_probs.onnx")

    inputs = rng.uniform(0, 255, size=(5, MODEL_SIDE, MODEL_SIDE, 3)).astype(np.float32)
    flat = inputs.transpose(0, 3, 1, 2).reshape(len(inputs), -1).astype(np.float64)
    logits = flat @ weights.astype(np.float64) + bias
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    probs = e / e.sum(axis=1, keepdims=True)
    np.savez(DATA / "tiny_linear_expected.npz", inputs=inputs, logits=logits, probs=probs)


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    build_scenes()
    build_models()
    print(f"assets written to {DATA}")
