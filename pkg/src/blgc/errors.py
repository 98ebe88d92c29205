"""Exception hierarchy shared across the package."""


class BLGCError(Exception):
    """Base class for every error raised by blgc."""


class UnknownNode(BLGCError, KeyError):
    def __init__(self, node):
        super().__init__(f"unknown node {node!r}")
        self.node = node

    def __str__(self):
        return self.args[0]


class InvalidGraphSpec(BLGCError, ValueError):
    pass


class ConstructionViolatesCap(BLGCError):
    def __init__(self, node, size, cap):
        super().__init__(
            f"node {node} has |N_r| = {size} > D = {cap} at construction")
        self.node = node
        self.size = size
        self.cap = cap


class CapViolation(BLGCError):
    def __init__(self, node, size, cap, pair):
        super().__init__(
            f"edge {pair} would give node {node} |N_r| = {size} > D = {cap}; "
            "mutation rejected")
        self.node = node
        self.size = size
        self.cap = cap
        self.pair = pair


class DuplicateEdge(BLGCError, ValueError):
    pass


class MissingEdge(BLGCError, ValueError):
    pass


class NonFiniteInput(BLGCError, ValueError):
    pass


class DimensionMismatch(BLGCError, ValueError):
    pass


class NormViolation(BLGCError, ValueError):
    """A state vector offered for storage lies outside the unit ball."""


class EmptyGraph(BLGCError, ValueError):
    pass


class SnapshotFormatError(BLGCError, ValueError):
    pass


class MonitorViolation(BLGCError):
    """An invariant monitor fired during evolution. Always fatal."""

    def __init__(self, step, node, message):
        super().__init__(f"step {step}, node {node}: {message}")
        self.step = step
        self.node = node
        self.message = message
