"""Domain errors. All subclass ValueError so callers can catch them broadly."""


class GraphInputError(ValueError):
    """Edge endpoints or edge-list text that cannot form a DiGraph."""


class MatrixMarketError(ValueError):
    """Malformed or unsupported Matrix Market input."""


class NotAcyclicError(ValueError):
    """A DAG was required but the graph has a directed cycle."""


class PrecedenceError(ValueError):
    """K < L < M precedence or cut-direction precondition violated."""


class OrderValidationError(ValueError):
    """An order or partition failed its validator."""


class SolverError(ValueError):
    """Spectral solver called outside its preconditions."""


class ProfileError(ValueError):
    """Run records that cannot yield the requested profile or summary."""
