"""Exception hierarchy shared across the package."""


class Aasist3Error(Exception):
    """Base class for every error raised by this package."""


class NonFiniteError(Aasist3Error, FloatingPointError):
    pass


class WavError(Aasist3Error):
    code = "wav"


class WavSampleRateError(WavError):
    code = "wav-sample-rate"


class WavChannelError(WavError):
    code = "wav-channels"


class WavBitDepthError(WavError):
    code = "wav-bit-depth"


class WavFormatError(WavError):
    code = "wav-format"


class CheckpointError(Aasist3Error):
    pass


class CheckpointFormatError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointShapeError(CheckpointError):
    pass


class CheckpointConfigError(CheckpointError):
    pass


class ConfigError(Aasist3Error):
    """Invalid configuration; ``key`` holds the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ProtocolError(Aasist3Error):
    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip())
