"""Exception types shared across the package."""


class RedsimError(Exception):
    """Base class for all errors raised by redsim."""


class InvalidParameter(RedsimError, ValueError):
    pass


class NoDesignAvailable(RedsimError):
    """No symmetric (n, r, 1) design can be built for the requested r."""


class UnsupportedParameters(RedsimError):
    """The closed form does not apply; measure empirically instead."""


class DegenerateOverlap(RedsimError):
    """The overlap variable has zero mean, so ROF/RDF are undefined."""


class SimulationUnderrun(RedsimError):
    """The simulation ended before every measured job entered service."""
