"""Exception types shared across the toolkit."""


class BactosegError(Exception):
    """Base class for toolkit errors."""


class UnsupportedFormatError(BactosegError):
    """Image file is not one of the accepted formats (PNG, JPEG, TIFF)."""


class CorruptImageError(BactosegError):
    """Image file exists but cannot be decoded."""


class DimensionMismatchError(BactosegError, ValueError):
    """Two rasters that must share dimensions do not."""


class TooFewDistinctColorsError(BactosegError, ValueError):
    """Image has fewer distinct colors than requested clusters."""


class InvalidClusterIndexError(BactosegError, ValueError):
    """Foreground cluster selection is empty or out of range."""


class EmptyHistogramError(BactosegError, ValueError):
    """Histogram has zero total mass."""


class EmptyCountsError(BactosegError, ValueError):
    """Confusion counts sum to zero."""


class EmptyRowSetError(BactosegError, ValueError):
    """Macro average over an empty row list."""


class EvenOrNonPositiveDiameterError(BactosegError, ValueError):
    """Disk kernels require an odd, positive diameter."""


class RootNotFoundError(BactosegError):
    """Dataset root directory does not exist."""


class NoImagesFoundError(BactosegError):
    """Dataset root contains no usable images."""


class BadRatiosError(BactosegError, ValueError):
    """Split ratios do not sum to one."""


class MissingConfigError(BactosegError, KeyError):
    """A species present in the manifest has no annotation config."""


class PatchLargerThanImageError(BactosegError, ValueError):
    """Requested patch size exceeds the image."""


class ShiftTooLargeError(BactosegError, ValueError):
    """Shift magnitude would move the whole patch out of frame."""


class UnknownImageError(BactosegError, KeyError):
    """Service request names an image id outside the manifest."""


class UnknownSpeciesError(BactosegError, KeyError):
    """Service request names a species id outside the manifest."""
