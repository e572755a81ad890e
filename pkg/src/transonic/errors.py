"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`TransonicError`.  The CLI maps the subclasses onto distinct exit
codes (see ``EXIT_CODES``).
"""


class TransonicError(Exception):
    """Base class for library errors."""


class DomainError(TransonicError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class VacuumError(DomainError):
    """B - |U|^2/2 is not positive, so the sound speed vanishes."""


class ParameterError(TransonicError, ValueError):
    """A tunable parameter (sigma1, grid size, N, ...) is unusable."""


class RegimeError(TransonicError):
    """The flow left the regime the construction relies on.

    Examples are a radial Mach number reaching one, a missing supersonic
    inner boundary, or a frozen coefficient with the wrong sign.
    """


class AdmissibilityError(RegimeError):
    """Boundary parameter l0 lies inside the forbidden interval."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class SolverError(TransonicError):
    """Linear solve failed; carries the smallest pivot when known."""

    def __init__(self, message, min_pivot=None):
        super().__init__(message)
        self.min_pivot = min_pivot


class NonConvergenceError(TransonicError):
    """Fixed-point iteration did not settle; ``history`` holds increments."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class ConsistencyError(TransonicError):
    """A discrete conservation check failed (e.g. mass flux closure)."""


class GeometryError(TransonicError):
    """Sonic locus could not be bracketed or is not a graph over theta / x3."""


class ConfigError(TransonicError, ValueError):
    """Configuration text could not be parsed or validated."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


EXIT_CODES = {
    ConfigError: 2,
    RegimeError: 3,
    DomainError: 3,
    ParameterError: 3,
    NonConvergenceError: 4,
    SolverError: 4,
    GeometryError: 5,
    ConsistencyError: 5,
}


def exit_code_for(exc):
    """Exit code for an exception; 1 for anything unexpected."""
    for cls in type(exc).__mro__:
        if cls in EXIT_CODES:
            return EXIT_CODES[cls]
    return 1
