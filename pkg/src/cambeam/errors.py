"""Exception types shared across the simulator."""


class CambeamError(Exception):
    """Base class for all simulator errors."""


class DegenerateGeometry(CambeamError):
    """Two entities coincide (or a distance is non-positive); no bearing exists."""


class OutOfFrame(CambeamError):
    """Pixel coordinate falls outside the image."""


class BehindCamera(CambeamError):
    """Angle at or beyond +/- 90 deg cannot be projected onto the image plane."""


class OutOfRange(CambeamError):
    """Time (or other scalar) outside the valid domain."""


class ConfigError(CambeamError):
    """Invalid or inconsistent configuration."""


class ShapeError(CambeamError):
    """Array dimensions do not match."""


class ModelNotReady(CambeamError):
    """Inference requested on an untrained / unloaded model."""
