"""Exception hierarchy shared by the solvers, the theory formulas and the harness."""


class PortfolioError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(PortfolioError, ValueError):
    """A parameter lies outside the domain where the model is defined."""


class SingularWishartError(PortfolioError):
    """The Wishart matrix J = X X^T could not be Cholesky-factored."""

    def __init__(self, detail: str = ""):
        msg = "singular Wishart matrix"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class DegenerateMeanError(PortfolioError):
    """The mean vector is (numerically) proportional to the budget vector."""

    def __init__(self, detail: str = ""):
        msg = "degenerate mean vector"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class InfeasibleRiskError(PortfolioError):
    """No budget-feasible portfolio attains the requested risk level."""

    def __init__(self, detail: str = ""):
        msg = "infeasible risk level"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class IllConditionedEliminationError(PortfolioError):
    """The pivot block of the constraint elimination is singular."""

    def __init__(self, detail: str = ""):
        msg = "ill-conditioned elimination"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class InsufficientSamplesError(PortfolioError):
    """Fewer than two samples survived at some grid point."""

    def __init__(self, detail: str = ""):
        msg = "insufficient valid samples"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
