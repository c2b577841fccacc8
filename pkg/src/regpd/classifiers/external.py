import subprocess
import threading

import numpy as np

from ..errors import BackendError, ProtocolError
from . import protocol
from .base import ClassifierHandle, as_pixels


class ExternalClassifier(ClassifierHandle):
    """Classifier served by a child process speaking PDX1 over stdin/stdout.

    ``predict`` blocks and is serialised by an internal lock. Any I/O failure
    poisons the handle: later calls fail fast without touching the pipe.
    """

    backend = "external"

    def __init__(self, argv, num_classes):
        super().__init__(num_classes)
        self.argv = list(argv)
        self._io_lock = threading.Lock()
        self._poisoned = None
        try:
            self._proc = subprocess.Popen(self.argv, stdin=subprocess.PIPE,
                                          stdout=subprocess.PIPE)
        except OSError as exc:
            raise BackendError(f"cannot spawn {self.argv!r}: {exc}") from exc
        try:
            announced = protocol.decode_handshake(protocol.read_exact(self._proc.stdout, 8))
        except (EOFError, ProtocolError) as exc:
            self.close()
            raise ProtocolError(f"handshake failed: {exc}") from exc
        if announced != self.num_classes:
            self.close()
            raise ProtocolError(
                f"server announced {announced} classes, expected {self.num_classes}"
            )

    @property
    def poisoned(self):
        return self._poisoned is not None

    def _forward(self, image):
        with self._io_lock:
            if self._poisoned is not None:
                raise BackendError(f"handle poisoned by earlier failure: {self._poisoned}")
            try:
                self._proc.stdin.write(protocol.encode_request(as_pixels(image)))
                self._proc.stdin.flush()
                payload = protocol.read_frame(self._proc.stdout)
            except (OSError, EOFError, ValueError) as exc:
                self._poisoned = str(exc) or type(exc).__name__
                raise BackendError(f"external classifier failed: {self._poisoned}") from exc
            if len(payload) != 4 * self.num_classes:
                self._poisoned = "wrong response length"
                raise ProtocolError(
                    f"response carries {len(payload)} bytes, expected {4 * self.num_classes}"
                )
        probs = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        return probs

    def describe(self):
        return "external:" + " ".join(self.argv)

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None or proc.poll() is not None:
            return
        for stream in (proc.stdin, proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


def open_external(command, num_classes):
    """Spawn ``command`` (argv list or shell-split string) and handshake."""
    if isinstance(command, str):
        import shlex
        command = shlex.split(command)
    return ExternalClassifier(command, num_classes)
