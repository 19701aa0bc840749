"""Exception types raised across the package."""


class ResidueLabError(Exception):
    """Base class for all package errors."""


class NotSquarefree(ResidueLabError, ValueError):
    pass


class NonInvertible(ResidueLabError, ValueError):
    pass


class NonCoprimeModuli(ResidueLabError, ValueError):
    pass


class NonCoprime(ResidueLabError, ValueError):
    pass


class BudgetExceeded(ResidueLabError):
    """A computation would exceed its configured memory or term budget."""

    def __init__(self, what, needed, budget):
        self.what = what
        self.needed = needed
        self.budget = budget
        super().__init__(f"{what}: needs {needed}, budget is {budget}")


class ZeroDensity(ResidueLabError, ValueError):
    pass


class PreconditionViolated(ResidueLabError, ValueError):
    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        msg = f"precondition violated: {hypothesis}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class EmptySet(ResidueLabError, ValueError):
    pass


class EvenModulus(ResidueLabError, ValueError):
    pass


class InsufficientPrimes(ResidueLabError, ValueError):
    pass


class ConfigError(ResidueLabError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
