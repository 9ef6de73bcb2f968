"""Exception hierarchy for the elasticity engine."""


class ElasmemError(Exception):
    """Base class for all engine errors."""


class ConfigError(ElasmemError):
    """Invalid geometry, watermark, scheduler, or simulator configuration."""


class AddressError(ElasmemError):
    """Guest frame number outside the configured virtual capacity."""


class StateError(ElasmemError):
    """A protocol step fired outside its defined state boundary.

    Raised e.g. for a double split or a merge with non-resident pages;
    signals a broken exactly-once protocol in the caller, never a
    recoverable condition.
    """


class ConsistencyError(ElasmemError):
    """Metadata disagrees with itself (e.g. pages scattered across sections)."""


class MpoolExhausted(ElasmemError):
    """Metadata pool reservation is used up; callers must degrade, not swap."""


class BackendFull(ElasmemError):
    """Swap backend hit its configured capacity; swap-out must stop."""


class CorruptionError(ElasmemError):
    """CRC mismatch or undecodable payload on swap-in."""


class NotSwappedFault(ElasmemError):
    """Fault taken on a page the swap engine never swapped out."""


class OutOfMemoryError(ElasmemError):
    """Free memory below min with no cold candidates left."""


class DmaRangeError(ElasmemError):
    """DMA range registration rejected (bounds or cross-owner overlap)."""


class UpgradeError(ElasmemError):
    """Hot-upgrade staging or commit refused."""
