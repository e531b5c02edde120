class KitchenSinksException(Exception):
    """ Generic toolkit exception marker """
    pass


class ConfigurationException(KitchenSinksException, ValueError):
    """ Raised when configuration or parameters are invalid """
    pass


class InvalidConfig(ConfigurationException):
    """ Raised when a config object fails schema validation """
    def __init__(self, *args, validation_errors=None, **kwargs):
        self.validation_errors = validation_errors
        super().__init__(*args, **kwargs)


class DimensionMismatch(KitchenSinksException, ValueError):
    """ Raised when array shapes do not agree """
    pass


class DataError(KitchenSinksException, RuntimeError):
    """ Generic dataset and file format errors """
    pass


class EmptyDataset(DataError):
    """ Raised when a dataset has no frames """
    pass


class BadMagic(DataError):
    """ Raised when a binary file does not start with expected magic """
    pass


class UnsupportedVersion(DataError):
    """ Raised when a binary file has unknown format version """
    pass


class TruncatedFile(DataError):
    """ Raised when a binary file is shorter than its header promises """
    pass


class LabelOutOfRange(DataError):
    """ Raised when a label falls outside 1..C """
    def __init__(self, *args, row=None, **kwargs):
        self.row = row
        super().__init__(*args, **kwargs)


class TraceError(DataError):
    """ Raised on empty, malformed or unresolvable checkpoint traces """
    pass


class OracleCapExceeded(KitchenSinksException, RuntimeError):
    """ Raised when an exact oracle is asked for more points than allowed """
    pass


class NumericalError(KitchenSinksException, ArithmeticError):
    """ Raised on non-finite scores, losses or parameters """
    pass


class DivergenceError(NumericalError):
    """ Raised when training diverges. Carries the partial trace """
    def __init__(self, *args, trace=None, **kwargs):
        self.trace = trace
        super().__init__(*args, **kwargs)
