"""Exception types shared across the package."""


class InvalidCount(ValueError):
    """An element/panel count is outside its valid range."""


class CoincidentPanels(ValueError):
    """Tx and Rx panel centroids coincide; link geometry is undefined."""


class ZeroDistance(ValueError):
    """Propagation distance must be strictly positive."""


class NoActiveLinks(RuntimeError):
    """No Tx-Rx panel pair has line of sight in the given scene."""


class EmptySet(ValueError):
    """A subcarrier set that must be nonempty is empty."""


class SubcarrierNotAllocated(ValueError):
    """Requested subcarrier is not allocated to the link's Tx array."""


class NuisanceSingular(RuntimeError):
    """The nuisance-parameter information block is numerically singular."""


class NoBracket(RuntimeError):
    """A requirement-crossing search found no sign change in the range.

    ``met_everywhere`` is True when the bound satisfies the requirement over
    the whole searched range, False when it satisfies it nowhere.
    """

    def __init__(self, message: str, met_everywhere: bool):
        super().__init__(message)
        self.met_everywhere = met_everywhere


class ConfigError(ValueError):
    """Run configuration failed validation."""
