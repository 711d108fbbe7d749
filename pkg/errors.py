"""
Exception hierarchy shared by every qdeph module.
Library code raises these; qdeph.py and app.py translate them for users.
"""


class QDephError(Exception):
    """Base class for all library errors"""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DimensionError(QDephError):
    pass


class HermiticityError(QDephError):
    pass


class ConvergenceError(QDephError):
    pass


class TPError(QDephError):
    """Kraus family is not trace preserving"""


class CorrelationError(QDephError):
    """Dephasing kernel lacks unit diagonal or positivity"""


class MeasureError(QDephError):
    pass


class StateError(QDephError):
    pass


class NormalizationError(QDephError):
    pass


class SupportError(QDephError):
    """Support inclusion required by a bound does not hold"""


class IsometryError(QDephError):
    pass


class ConfigError(QDephError):
    pass


class InputError(QDephError):
    """Malformed JSON or file content"""
