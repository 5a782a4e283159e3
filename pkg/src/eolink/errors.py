"""Exception hierarchy.

Every domain error carries a short machine-readable ``code`` that the CLI
prints on failure.
"""


class EOLinkError(ValueError):
    code = "domain-error"


class PumpDetuningError(EOLinkError):
    code = "pump-detuned"


class DegenerateProfileError(EOLinkError):
    code = "degenerate-profile"


class CalibrationWindowError(EOLinkError):
    code = "calibration-window"


class BandwidthUnresolvedError(EOLinkError):
    code = "bandwidth-unresolved"


class UninvertibleError(EOLinkError):
    code = "uninvertible"


class InfeasibleInputError(EOLinkError):
    code = "infeasible-input"


class NoCandidatesError(EOLinkError):
    code = "no-candidates"


class DegenerateVernierError(EOLinkError):
    code = "degenerate-vernier"


class VoltageRangeError(EOLinkError):
    code = "voltage-range"


class InfeasibleMatchingError(EOLinkError):
    code = "infeasible-matching"

    def __init__(self, message, voltages=None, residuals=None):
        super().__init__(message)
        self.voltages = voltages
        self.residuals = residuals


class IncompatibleGridsError(EOLinkError):
    code = "incompatible-grids"


class FitError(EOLinkError):
    code = "fit-error"
