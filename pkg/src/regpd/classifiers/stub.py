"""Reference PDX1 server, for loopback tests and as a template for real models.

    python -m regpd.classifiers.stub --classes 2
    python -m regpd.classifiers.stub --mode area-fraction --color 255,0,0 --ref 0.2

Modes:
  mean           class 1 gets mean intensity / 255, the rest go to class 0
  area-fraction  serve the synthetic area-fraction oracle
  wrong-length   answer with num_classes + 1 values
  crash-after    exit abruptly after --after requests
"""

import argparse
import sys

import numpy as np

from . import protocol
from .synthetic import AreaFractionOracle


def mean_probs(pixels, num_classes):
    p = float(pixels.mean()) / 255.0
    out = np.zeros(num_classes)
    out[0] = 1.0 - p
    out[min(1, num_classes - 1)] += p
    return out


def serve(args, stdin, stdout):
    oracle = None
    if args.mode == "area-fraction":
        color = [float(c) for c in args.color.split(",")]
        oracle = AreaFractionOracle(color, args.tol, args.ref)
        args.classes = 2
    stdout.write(protocol.encode_handshake(args.classes))
    stdout.flush()
    served = 0
    while True:
        try:
            payload = protocol.read_frame(stdin)
        except EOFError:
            return 0
        pixels = protocol.decode_request(payload)
        if args.mode == "crash-after" and served >= args.after:
            return 3
        if oracle is not None:
            probs = oracle.predict(pixels)
        else:
            probs = mean_probs(pixels, args.classes)
        if args.mode == "wrong-length":
            probs = np.append(probs, 0.0)
        stdout.write(protocol.encode_response(probs))
        stdout.flush()
        served += 1


def main(argv=None):
    parser = argparse.ArgumentParser(prog="regpd-stub", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--classes", type=int, default=2)
    parser.add_argument("--mode", default="mean",
                        choices=["mean", "area-fraction", "wrong-length", "crash-after"])
    parser.add_argument("--after", type=int, default=0)
    parser.add_argument("--color", default="255,0,0")
    parser.add_argument("--tol", type=float, default=30.0)
    parser.add_argument("--ref", type=float, default=0.1)
    args = parser.parse_args(argv)
    return serve(args, sys.stdin.buffer, sys.stdout.buffer)


if __name__ == "__main__":
    sys.exit(main())
