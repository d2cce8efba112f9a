"""Exception hierarchy shared by all modules."""


class NonExchError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NonExchError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParameterError(NonExchError, ValueError):
    """A copula family parameter is out of range."""


class AdmissibilityError(ParameterError):
    """The perturbation coefficient would break 2-increasingness."""


class WeightError(ParameterError):
    """Convex-combination weights are negative or do not sum to one."""


class SymmetryError(NonExchError, ValueError):
    """A copula required to be symmetric is not."""


class ConfigError(NonExchError, ValueError):
    """Invalid test or experiment configuration."""


class DataError(NonExchError, ValueError):
    """Input data is unusable (NaN, too short, ...)."""


class TieError(DataError):
    """Raw data contains exact ties within a margin.

    ``indices`` maps the margin name (``"x"`` or ``"y"``) to the sorted
    indices of the tied observations.
    """

    def __init__(self, indices):
        self.indices = {k: list(v) for k, v in indices.items() if len(v)}
        parts = [f"{k}: {v}" for k, v in self.indices.items()]
        super().__init__("tied values in margin(s) " + "; ".join(parts))


class RankFlagError(DataError):
    """A rank-based estimator received a pseudo-sample that is not margin-ranked."""
