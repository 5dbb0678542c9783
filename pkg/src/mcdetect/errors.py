"""Exception hierarchy shared by all mcdetect modules."""


class McdetectError(Exception):
    pass


class InputError(McdetectError):
    """Unreadable or malformed input data (CLI exit status 1)."""


class FormatError(InputError):
    pass


class TruncatedError(InputError):
    pass


class UnsupportedError(InputError):
    pass


class EmptyInputError(InputError):
    pass


class ParamError(McdetectError, ValueError):
    """Invalid argument value (CLI exit status 2)."""


class InsufficientScalesError(ParamError):
    pass


class DegenerateFitError(ParamError):
    pass
