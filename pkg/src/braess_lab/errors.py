"""Exception hierarchy shared by all modules."""


class BraessLabError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BraessLabError, ValueError):
    """An input object violates its structural invariants."""


class GroundSetTooLarge(BraessLabError):
    """A brute-force routine was asked to enumerate too many subsets."""


class NotAMatroid(BraessLabError):
    """A matroid-only operation received a clutter failing basis exchange."""


class WitnessNotFound(BraessLabError):
    """No exchange violation exists, so no non-matroid witness can be built."""


class InfeasibleDistribution(BraessLabError):
    """A strategy distribution does not match the model's demands."""


class NotConverged(BraessLabError):
    """The solver hit its iteration cap; ``result`` holds the best iterate."""

    def __init__(self, message, result=None, report=None):
        super().__init__(message)
        self.result = result
        self.report = report


class InvalidReduction(BraessLabError):
    """A reduction raises a cost function or a demand."""


class NotANonMatroid(BraessLabError):
    """Counterexample synthesis needs a non-matroid first clutter."""


class EmptySystem(BraessLabError):
    """A set system in a family is empty."""


class NeedThreePopulations(BraessLabError):
    """The demand-reduction counterexample needs at least three populations."""


class BigMTooSmall(BraessLabError):
    """A big-M resource carried flow in a synthesized equilibrium."""
