"""Exception taxonomy shared by all mwuq modules.

The CLI maps these onto exit-code categories: configuration/contract
errors -> 2, model evaluation errors -> 3, recovery errors -> 4,
partition/budget errors -> 5.
"""


class MwuqError(Exception):
    pass


class ConfigurationError(MwuqError):
    """Invalid option, order, or size (e.g. polynomial order out of range)."""


class ContractError(MwuqError):
    """Caller violated an API contract (e.g. coefficient length mismatch)."""


class DomainError(MwuqError):
    """A point lies outside the box it is supposed to be in."""


class ModelError(MwuqError):
    """A model evaluation failed; carries the offending input point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class IntegrationError(ModelError):
    """ODE state left its physically admissible range."""


class CoefficientError(ModelError):
    """PDE coefficient became non-positive on the grid."""


class RecoveryError(MwuqError):
    """l1 solver failed to converge; carries the residual achieved."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PartitionIntegrityError(MwuqError):
    """Leaves do not tile the root box (hole, overlap, or volume mismatch)."""


class BudgetError(MwuqError):
    """Sample budget exceeded; carries the partial tree built so far."""

    def __init__(self, message, partial_tree=None):
        super().__init__(message)
        self.partial_tree = partial_tree
