"""Simulated guest-physical address space.

A flat two-granularity mapping table (the EPT/IOMMU analog: one entry per
memory section, expanding to per-page slots while split), a physical MS
allocator with conservation accounting, and the pinned metadata pool the
engine allocates its own structures from. This module asserts state
preconditions and never blocks; per-MS serialization of split/merge is
the swap engine's job.
"""

import enum
import threading
from dataclasses import dataclass

from . import events as ev
from .content import zero_page
from .errors import (AddressError, ConfigError, ConsistencyError,
                     MpoolExhausted, StateError)


class MapState(enum.Enum):
    NOT_PRESENT = 0
    HUGE = 1
    SMALL = 2


@dataclass(frozen=True)
class Geometry:
    """MS/MP sizing and the physical/virtual section counts."""

    ms_size: int
    mp_size: int
    phys_ms_count: int
    virt_extra_ms_count: int = 0

    def __post_init__(self):
        for name in ("ms_size", "mp_size"):
            v = getattr(self, name)
            if v <= 0 or v & (v - 1):
                raise ConfigError(f"{name} must be a power of two, got {v}")
        if self.ms_size % self.mp_size:
            raise ConfigError("ms_size must be a multiple of mp_size")
        if self.mp_size % 8:
            raise ConfigError("mp_size must be a multiple of 8 bytes")
        if self.phys_ms_count < 1 or self.virt_extra_ms_count < 0:
            raise ConfigError("section counts out of range")

    @property
    def mps_per_ms(self):
        return self.ms_size // self.mp_size

    @property
    def virt_ms_count(self):
        return self.phys_ms_count + self.virt_extra_ms_count

    @property
    def phys_bytes(self):
        return self.phys_ms_count * self.ms_size

    @classmethod
    def scaled(cls, phys_ms_count=64, virt_extra_ms_count=32):
        """Desk-scale default: 64 KiB sections, 16 pages each."""
        return cls(64 * 1024, 4 * 1024, phys_ms_count, virt_extra_ms_count)

    @classmethod
    def production(cls):
        """2 MiB sections over 32 GiB physical + 16 GiB virtual memory."""
        return cls(2 * 1024 * 1024, 4 * 1024, 16384, 8192)


class MappingEntry:
    __slots__ = ("state", "pfn", "mp_pfns", "pinned")

    def __init__(self):
        self.state = MapState.NOT_PRESENT
        self.pfn = None
        self.mp_pfns = None
        self.pinned = False


@dataclass
class MpoolBlock:
    block_id: int
    size_class: int
    owner: str
    pinned: bool = True


# slab size classes; larger requests take whole small pages ("full pages")
SLAB_CLASSES = (64, 128, 256, 512, 1024, 2048)


class MetadataPool:
    """Accounting allocator for engine metadata; everything in it is pinned."""

    def __init__(self, reservation_bytes, mp_size):
        self.reservation = reservation_bytes
        self.mp_size = mp_size
        self.used = 0
        self.full_page_bytes = 0
        self.slab_bytes = 0
        self.by_owner = {}
        self._next_id = 0
        self._lock = threading.Lock()

    def _round(self, size):
        for cls_size in SLAB_CLASSES:
            if size <= cls_size:
                return cls_size, False
        pages = -(-size // self.mp_size)
        return pages * self.mp_size, True

    def alloc(self, size, owner):
        rounded, full = self._round(size)
        with self._lock:
            if self.used + rounded > self.reservation:
                raise MpoolExhausted(
                    f"mpool reservation exhausted: {self.used} + {rounded} "
                    f"> {self.reservation}")
            self.used += rounded
            if full:
                self.full_page_bytes += rounded
            else:
                self.slab_bytes += rounded
            self.by_owner[owner] = self.by_owner.get(owner, 0) + rounded
            self._next_id += 1
            return MpoolBlock(self._next_id, rounded, owner)

    def free(self, block):
        with self._lock:
            self.used -= block.size_class
            self.by_owner[block.owner] -= block.size_class
            if block.size_class in SLAB_CLASSES:
                self.slab_bytes -= block.size_class
            else:
                self.full_page_bytes -= block.size_class

    def report(self):
        with self._lock:
            return {
                "reservation": self.reservation,
                "used": self.used,
                "full_page_bytes": self.full_page_bytes,
                "slab_bytes": self.slab_bytes,
                "by_owner": dict(self.by_owner),
            }


class MemCounters:
    """Atomic-update memory accounting cells."""

    def __init__(self, free_ms, phys_ms_count, mpool_ms):
        self._lock = threading.Lock()
        self.free_ms = free_ms
        self.resident_ms = 0
        self.swapped_mp = 0
        self.phys_ms_count = phys_ms_count
        self.mpool_ms = mpool_ms

    def add(self, field, delta):
        with self._lock:
            value = getattr(self, field) + delta
            if value < 0:
                raise ConsistencyError(f"counter {field} went negative")
            setattr(self, field, value)

    def snapshot(self):
        with self._lock:
            return {"free_ms": self.free_ms, "resident_ms": self.resident_ms,
                    "swapped_mp": self.swapped_mp}

    def check_conservation(self):
        snap = self.snapshot()
        total = snap["free_ms"] + snap["resident_ms"] + self.mpool_ms
        if total != self.phys_ms_count:
            raise ConsistencyError(
                f"conservation broken: free {snap['free_ms']} + resident "
                f"{snap['resident_ms']} + mpool {self.mpool_ms} != "
                f"{self.phys_ms_count}")


class AddressSpace:
    """Two-granularity mapping table plus the physical-MS free list.

    EPT and IOMMU views share one table (they always split and merge
    together); translate() takes an ``iommu`` flag for the device-side
    path but consults the same entries.
    """

    def __init__(self, geometry, mpool_reservation=None, corpus=None,
                 events=None):
        self.geometry = geometry
        if mpool_reservation is None:
            mpool_reservation = int(geometry.phys_bytes * 0.012)
        if mpool_reservation >= geometry.phys_bytes:
            raise ConfigError("mpool reservation exceeds physical capacity")
        self.events = events or ev.EventLog()
        self.corpus = corpus
        mpool_ms = -(-mpool_reservation // geometry.ms_size)
        self._mpool_ms = mpool_ms
        self.mpool = MetadataPool(mpool_reservation, geometry.mp_size)
        self.entries = [MappingEntry() for _ in range(geometry.virt_ms_count)]
        # metadata pool is carved from the top physical MSes, identity-mapped
        # (the GPA=HPA constraint): those gfns are pinned and never tracked.
        self._pinned_gfns = frozenset(
            range(geometry.phys_ms_count - mpool_ms, geometry.phys_ms_count))
        for gfn in self._pinned_gfns:
            entry = self.entries[gfn]
            entry.state = MapState.HUGE
            entry.pfn = gfn
            entry.pinned = True
        self._alloc_lock = threading.Lock()
        self._free = list(range(geometry.phys_ms_count - mpool_ms - 1, -1, -1))
        self.counters = MemCounters(len(self._free), geometry.phys_ms_count,
                                    mpool_ms)
        self._overlay = {}
        self._zero = zero_page(geometry.mp_size)

    # -- lookups ---------------------------------------------------------

    def _entry(self, gfn):
        if not 0 <= gfn < self.geometry.virt_ms_count:
            raise AddressError(f"gfn {gfn} outside virtual capacity "
                               f"{self.geometry.virt_ms_count}")
        return self.entries[gfn]

    def pinned_gfns(self):
        return self._pinned_gfns

    def is_pinned(self, gfn):
        return gfn in self._pinned_gfns

    def translate(self, gfn, mp_offset, iommu=False):
        """Physical MP frame for (gfn, mp), or None when not resident."""
        entry = self._entry(gfn)
        mps = self.geometry.mps_per_ms
        if not 0 <= mp_offset < mps:
            raise AddressError(f"mp offset {mp_offset} outside section")
        state = entry.state
        if state is MapState.HUGE:
            return entry.pfn * mps + mp_offset
        if state is MapState.SMALL:
            pfn = entry.mp_pfns[mp_offset]
            if pfn is None:
                return None
            return pfn * mps + mp_offset
        return None

    def ms_resident_mask(self, gfn):
        entry = self._entry(gfn)
        if entry.state is MapState.HUGE:
            return [True] * self.geometry.mps_per_ms
        if entry.state is MapState.SMALL:
            return [p is not None for p in entry.mp_pfns]
        return [False] * self.geometry.mps_per_ms

    # -- physical allocation ---------------------------------------------

    def alloc_ms(self):
        """Pop one free physical MS; None when the free list is empty."""
        with self._alloc_lock:
            if not self._free:
                return None
            pfn = self._free.pop()
        self.counters.add("free_ms", -1)
        return pfn

    def free_phys(self, pfn):
        with self._alloc_lock:
            self._free.append(pfn)
        self.counters.add("free_ms", 1)

    # -- mapping transitions ----------------------------------------------

    def populate(self, gfn, pfn):
        """First-touch population: NOT_PRESENT -> HUGE(pfn)."""
        entry = self._entry(gfn)
        if entry.state is not MapState.NOT_PRESENT:
            raise StateError(f"populate on gfn {gfn} in state {entry.state}")
        entry.pfn = pfn
        entry.mp_pfns = None
        entry.state = MapState.HUGE
        self.counters.add("resident_ms", 1)
        self.events.emit(ev.MS_POPULATE, gfn, data=pfn)

    def split_mapping(self, gfn):
        """HUGE -> SMALL with every MP resident; double split is an error."""
        entry = self._entry(gfn)
        if entry.state is not MapState.HUGE:
            raise StateError(
                f"split on gfn {gfn} in state {entry.state}: split/merge "
                "protocol violated")
        entry.mp_pfns = [entry.pfn] * self.geometry.mps_per_ms
        entry.state = MapState.SMALL
        self.events.emit(ev.SPLIT, gfn)

    def merge_mapping(self, gfn, new_pfn):
        """SMALL with all MPs resident in new_pfn -> HUGE(new_pfn)."""
        entry = self._entry(gfn)
        if entry.state is not MapState.SMALL:
            raise StateError(f"merge on gfn {gfn} in state {entry.state}")
        for mp, pfn in enumerate(entry.mp_pfns):
            if pfn is None:
                raise StateError(
                    f"merge on gfn {gfn}: MP {mp} not resident")
            if pfn != new_pfn:
                raise ConsistencyError(
                    f"merge on gfn {gfn}: MP {mp} in MS {pfn}, not {new_pfn}")
        entry.pfn = new_pfn
        entry.mp_pfns = None
        entry.state = MapState.HUGE
        self.events.emit(ev.MERGE, gfn)

    def clear_mp(self, gfn, mp):
        entry = self._entry(gfn)
        if entry.state is not MapState.SMALL:
            raise StateError(f"clear_mp on gfn {gfn} in state {entry.state}")
        entry.mp_pfns[mp] = None

    def install_mp(self, gfn, mp, pfn):
        entry = self._entry(gfn)
        if entry.state is not MapState.SMALL:
            raise StateError(f"install_mp on gfn {gfn} in state {entry.state}")
        if entry.mp_pfns[mp] is not None:
            raise StateError(f"install_mp: gfn {gfn} mp {mp} already resident")
        entry.mp_pfns[mp] = pfn

    def unbind_phys(self, gfn):
        """Detach the physical MS after the last MP's swap-out."""
        entry = self._entry(gfn)
        if entry.state is not MapState.SMALL or \
                any(p is not None for p in entry.mp_pfns):
            raise StateError(f"unbind on gfn {gfn} with resident MPs")
        entry.pfn = None
        self.counters.add("resident_ms", -1)

    def bind_phys(self, gfn, pfn):
        """Attach a fresh physical MS at the first MP's swap-in."""
        entry = self._entry(gfn)
        if entry.state is not MapState.SMALL or entry.pfn is not None:
            raise StateError(f"bind on gfn {gfn} in state {entry.state}")
        entry.pfn = pfn
        self.counters.add("resident_ms", 1)

    # -- page contents ------------------------------------------------------

    def read_mp(self, gfn, mp):
        data = self._overlay.get((gfn, mp))
        if data is not None:
            return data
        if self.corpus is not None:
            return self.corpus.mp_bytes(gfn, mp)
        return self._zero

    def write_mp(self, gfn, mp, data):
        if len(data) != self.geometry.mp_size:
            raise ConfigError("write_mp requires a full page")
        self._overlay[(gfn, mp)] = bytes(data)

    # -- metadata pool -------------------------------------------------------

    def mpool_alloc(self, size, owner):
        return self.mpool.alloc(size, owner)

    def mpool_free(self, block):
        self.mpool.free(block)


def create_space(geometry, mpool_reservation=None, corpus=None, events=None):
    """Build an address space; all guest MSes start NOT_PRESENT."""
    return AddressSpace(geometry, mpool_reservation, corpus, events)
