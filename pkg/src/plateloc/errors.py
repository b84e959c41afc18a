"""Exception types raised across the localization pipeline.

Each pipeline failure that the command line reports maps to a stable
``code`` string and exit status.
"""


class PlatelocError(Exception):
    code = "internal_error"
    exit_status = 10


class ParseError(PlatelocError):
    code = "parse_error"
    exit_status = 2


class ValidationError(PlatelocError):
    code = "validation_error"
    exit_status = 2

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnknownLandmark(PlatelocError, LookupError):
    code = "unknown_landmark"
    exit_status = 4

    def __init__(self, text):
        self.text = text
        super().__init__(f"no landmark with text {text!r}")


class NoLandmarkRecognized(PlatelocError):
    code = "no_landmark_recognized"
    exit_status = 3


class EngineFailure(PlatelocError):
    code = "engine_failure"
    exit_status = 6


class InsufficientLines(PlatelocError):
    code = "insufficient_lines"
    exit_status = 5


class NoConsensus(PlatelocError):
    code = "no_consensus"
    exit_status = 5


class DegenerateVerticalVP(PlatelocError):
    code = "degenerate_vertical_vp"
    exit_status = 7


class SingularCalibration(PlatelocError):
    code = "singular_calibration"
    exit_status = 2


class DomainError(PlatelocError, ValueError):
    code = "domain_error"
    exit_status = 7


class InvalidWidth(DomainError):
    code = "invalid_width"


class BehindCamera(PlatelocError):
    code = "behind_camera"
    exit_status = 7
