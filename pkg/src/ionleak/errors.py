"""Exception hierarchy shared across the package."""


class IonLeakError(Exception):
    """Base class for all package errors."""


class DataError(IonLeakError):
    """Input data is unusable for the requested operation."""


class TraceTooShort(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class InvalidBand(DataError):
    pass


class ConfigInvalid(DataError):
    pass


class InvalidLevels(DataError):
    pass


class InsufficientShots(DataError):
    pass


class NetworkError(IonLeakError):
    """Base for stream transport failures."""


class ConnectionLost(NetworkError):
    def __init__(self, message, partial_path=None):
        super().__init__(message)
        self.partial_path = partial_path


class MalformedFrame(NetworkError):
    def __init__(self, message, partial_path=None):
        super().__init__(message)
        self.partial_path = partial_path
