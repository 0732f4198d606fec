"""Exception hierarchy shared by the simulator, netlist tools and CLI."""


class MarbleError(Exception):
    """Base class for every error raised by marblegate."""


class DomainError(MarbleError, ValueError):
    """An argument lies outside the domain of a physical formula."""


class ConfigurationError(MarbleError, ValueError):
    """A component was configured inconsistently."""


class SimulationIntegrityError(MarbleError, RuntimeError):
    """Non-finite numbers found their way into the simulation state."""


class CollisionError(MarbleError, RuntimeError):
    """A collision was resolved for a pair that cannot collide."""


class UsageError(MarbleError, ValueError):
    """An API was called with arguments that do not fit together."""


class SimulationTimeout(MarbleError, RuntimeError):
    """Marbles were still moving when the horizon was reached."""


class ClassificationError(MarbleError, RuntimeError):
    """A marble finished somewhere that no sink covers."""

    def __init__(self, marble_id, x, y):
        super().__init__(f"marble {marble_id!r} ended at x={x:.3f} mm, y={y:.3f} mm, outside every sink")
        self.marble_id = marble_id
        self.x = x
        self.y = y
