"""Exception types shared across the simulator modules."""


class NeucfError(Exception):
    """Base class for all simulator errors."""


# vision / calibration
class CollinearPoints(NeucfError):
    """The three calibration source points do not span the plane."""


class OutOfFrame(NeucfError):
    """A point lies more than one pixel outside the calibrated extents."""


# tracking
class ClockRegression(NeucfError):
    """A track update was attempted with a timestamp earlier than the last detection."""


# decision field
class TargetBehindField(NeucfError):
    """Egocentric target direction is not representable on the [0, 180] degree lattice."""


class NumericalBlowup(NeucfError):
    """Field activity left the sane numeric range."""


# controllers
class DegenerateReach(NeucfError):
    """Reach distance too small to pose a control problem."""


class IllConditioned(NeucfError):
    """A Riccati iterate became numerically unusable."""


class HorizonExceeded(NeucfError):
    """A policy was evaluated past its planning horizon; the caller must re-plan."""


# baseline trajectory generator
class NonpositiveHorizon(NeucfError):
    """Terminal time of a time-scaling profile must be positive."""


class OutOfHorizon(NeucfError):
    """A profile was sampled outside [0, T]."""


# metrics
class TooFewSamples(NeucfError):
    """Not enough samples for the requested statistic."""


class DegeneratePath(NeucfError):
    """The sample set has no spatial extent."""


class NonuniformSampling(NeucfError):
    """Derivative statistics require uniformly spaced samples."""


# scenarios / engine / cli
class ParseError(NeucfError):
    """Scenario text is not valid JSON."""


class ValidationError(NeucfError):
    """Scenario content violates the script schema or its invariants."""


class ScenarioInvalid(ValidationError):
    """A scenario handed to the engine failed validation."""


# service
class SessionNotFinished(NeucfError):
    """Recording is only available once a session's run has finished."""
