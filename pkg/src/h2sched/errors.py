"""Exception types shared across the package."""


class DomainError(ValueError):
    """A closed-form model was evaluated outside its domain."""


class InfeasibleVoltageError(DomainError):
    """The rectifier cannot reach the requested DC voltage at this AC voltage."""


class ConstraintError(ValueError):
    """An operating constraint (cooling band, SOC box, slew limit, ...) is violated."""


class CapabilityError(ValueError):
    """A device set-point lies outside its capability region."""


class ScenarioError(ValueError):
    """Scenario file failed schema or invariant checks.

    ``problems`` holds ``(locator, message)`` pairs.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        msg = "; ".join(f"{loc}: {m}" for loc, m in self.problems)
        super().__init__(msg or "invalid scenario")


class SolverError(RuntimeError):
    """The optimizer produced no usable incumbent within its budget."""
