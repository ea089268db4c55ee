"""Exception types raised by the simulation library."""


class SimulationError(Exception):
    """Base class for all library errors."""


class InvalidConfig(SimulationError, ValueError):
    pass


class EmptyCandidates(SimulationError):
    """No real probe frequency makes the two squared transmissions equal."""


class ZeroPhotons(SimulationError, ValueError):
    pass


class ZeroProbabilityOutcome(SimulationError):
    pass


class DegenerateState(SimulationError):
    pass


class NotNormalized(SimulationError, ValueError):
    pass


class NumericalFailure(SimulationError, ArithmeticError):
    pass
