"""Exception hierarchy shared by all modules."""


class ZenoError(Exception):
    """Base class for every error raised by zenoest."""


class InvalidParameterError(ZenoError, ValueError):
    pass


class DimensionError(ZenoError, ValueError):
    pass


class PropagationError(ZenoError, ArithmeticError):
    """Matrix exponential failed or the propagated trace drifted."""


class ProjectionError(ZenoError, ValueError):
    """Projection onto an outcome of (numerically) zero probability."""


class AmbiguityError(ZenoError, ValueError):
    """Transition kernel has more than one stationary distribution."""

    def __init__(self, message, eigenspace_dim):
        super().__init__(message)
        self.eigenspace_dim = eigenspace_dim


class DivergentInformationError(ZenoError, ArithmeticError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class UnsupportedClosedFormError(ZenoError, ValueError):
    pass


class OutOfRegimeError(ZenoError, ValueError):
    pass


class ImpossibleRecordError(ZenoError, ValueError):
    """Every candidate assigns zero likelihood to the observed record."""


class InfeasiblePlanError(ZenoError, ValueError):
    pass
