"""Exception types shared across the package."""


class SepshortError(Exception):
    """Base class for all errors raised by this package."""


class DimacsError(SepshortError):
    """Malformed DIMACS input; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GenerationError(SepshortError):
    """A generator rule violated a constraint the caller requested."""


class OverflowGuardError(SepshortError):
    """Distances on this input could exceed the safe integer range."""


class BudgetUnmet(SepshortError):
    """No separation within the requested budget was found.

    Either the heuristic failed or the graph is denser than the promised
    class.  `best` carries the best separation found (may be None) so
    callers can proceed degraded if they choose.
    """

    def __init__(self, message: str, best=None, context: str = ""):
        self.best = best
        self.context = context
        super().__init__(message if not context else f"{message} [{context}]")


class NegativeCycleError(SepshortError):
    """A negative-weight cycle was detected.

    `vertices` lists the cycle v0, v1, ..., v_{k-1} (closure back to v0
    implicit).  `edges` lists the k edge ids when the cycle lives in a
    concrete graph; None when only a witness vertex is known (delta merge).
    `weight` is the verified cycle weight (< 0) when edges are known.
    """

    def __init__(self, message: str, vertices=None, edges=None, weight=None):
        self.vertices = list(vertices) if vertices is not None else None
        self.edges = list(edges) if edges is not None else None
        self.weight = weight
        super().__init__(message)


class NegativeEdgeError(SepshortError):
    """A nonnegative-weights-only engine was fed a negative edge."""

    def __init__(self, message: str, edge_id: int):
        self.edge_id = edge_id
        super().__init__(message)


class UnreachableError(SepshortError):
    """Path extraction was asked for a vertex with infinite distance."""


class InvalidDeltaError(SepshortError):
    """The pieces handed to the merge do not form a valid delta system."""
