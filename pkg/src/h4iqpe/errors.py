"""Exception hierarchy shared by every stage of the pipeline."""


class H4Error(Exception):
    """Base class for all package errors."""


class InvalidInput(H4Error, ValueError):
    pass


class DegenerateGeometry(InvalidInput):
    """Raised for the exactly square arrangement (beta = 90 degrees)."""


class SingularGeometry(InvalidInput):
    """Raised when two nuclei coincide."""


class ScfNotConverged(H4Error):
    """SCF hit its iteration cap. ``result`` holds the last iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateDenominator(H4Error):
    def __init__(self, excitation, denominator):
        super().__init__(
            f"MP2 denominator {denominator:.3e} too small for excitation {excitation}"
        )
        self.excitation = excitation
        self.denominator = denominator


class StateCorrupt(H4Error):
    """Statevector norm drifted away from one."""


class SectorLeak(H4Error):
    """State has weight outside the cached particle-number/spin sector."""


class MissingLabel(H4Error):
    def __init__(self, found):
        super().__init__(
            f"expected 3 excited states passing the HF-overlap screen, found {len(found)}: {found}"
        )
        self.found = found


class UnsupportedPlot(H4Error):
    pass


class ConfigError(InvalidInput):
    """Bad configuration text or an out-of-range experiment setting."""


class ExperimentFailed(H4Error):
    """An experiment-level sanity assertion did not hold."""
