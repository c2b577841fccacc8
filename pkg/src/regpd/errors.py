class RegPDError(Exception):
    """Base class for errors raised by regpd."""


class ImageFormatError(RegPDError):
    pass


class SegmentationError(RegPDError):
    pass


class BackendError(RegPDError):
    """A classifier backend failed to produce a prediction."""


class ProtocolError(BackendError):
    """The external classifier violated the PDX1 wire protocol."""


class ShapeMismatchError(BackendError):
    pass


class UnsupportedModelError(BackendError):
    pass
