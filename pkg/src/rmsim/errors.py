"""Exception types raised by the simulator.

Every error that a caller is expected to catch has its own class; generic
misuse (wrong types, negative counts) raises plain ValueError.
"""


class SimulationError(Exception):
    """Base class for all simulator-specific errors."""


# --- state construction / observables ---------------------------------------

class WidthUnresolvable(SimulationError):
    """Packet width is below the 4*dx resolvability floor of the grid."""


class PacketTouchesBoundary(SimulationError):
    """Packet center closer than 8 sigma to a grid edge."""


class NotNormalized(SimulationError):
    """State norm deviates from 1 by more than the observable tolerance."""


class GridMismatch(SimulationError):
    """Two states live on different grids."""


class LeakageDetected(SimulationError):
    """Probability mass in the outer grid band exceeds the allowed budget."""


# --- geometry ----------------------------------------------------------------

class MixedResolutions(SimulationError):
    """Class distance requested between classes of unequal resolution."""


class MixedWidths(SimulationError):
    """Phase-space overlap requested between packets of unequal width."""


class ScaledBelowResolution(SimulationError):
    """Rescaling would push the state spread below the grid floor."""


class TranslatedOffGrid(SimulationError):
    """Translation would move appreciable mass into the outer grid band."""


class DegenerateSpread(SimulationError):
    """State spread is below 2*dx; log-spread coordinates are meaningless."""


# --- ensembles / dynamics ----------------------------------------------------

class DimensionMismatch(SimulationError):
    """Kick dimension does not match the state dimension."""


class CalibrationDiverged(SimulationError):
    """Step-size calibration exhausted its search bracket."""


class NotLocalized(SimulationError):
    """Operation requires a sigma-localized state."""


# --- collapse ----------------------------------------------------------------

class DetectorOverlap(SimulationError):
    """Detector class centers are closer than the 6 sigma separation floor."""


class TimeoutFractionExceeded(SimulationError):
    """Too many collapse runs timed out for the statistics to be meaningful.

    Carries the partial report in ``.report`` so callers can still inspect it.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# --- configuration -----------------------------------------------------------

class ConfigError(SimulationError):
    """Run configuration failed strict validation; message names the key."""


class DimensionError(SimulationError):
    """Arithmetic attempted between incompatible physical dimensions."""
