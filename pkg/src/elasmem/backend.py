"""In-memory swap destination: zero markers and compressed payloads.

Zero pages are detected on store and cost nothing (one shared slot);
everything else goes through a pluggable block codec with a raw fallback
when compression does not shrink. Every slot carries a CRC-32 of the
original bytes, recomputed and checked on load.
"""

import threading
import zlib
from dataclasses import dataclass

from . import kernels
from .content import zero_page
from .errors import BackendFull, ConfigError, CorruptionError

KIND_ZERO = 0
KIND_COMPRESSED = 1

CRC_BYTES_PER_MP = 4


class ZlibCodec:
    """Stdlib deflate; level 1 favors speed over ratio."""

    name = "zlib"

    def __init__(self, level=1):
        self.level = level

    def compress(self, data):
        return zlib.compress(data, self.level)

    def decompress(self, payload, orig_len):
        out = zlib.decompress(payload)
        if len(out) != orig_len:
            raise CorruptionError("decompressed length mismatch")
        return out


class WordRleCodec:
    """Zero-run word RLE from the kernel layer.

    Swap pages are dominated by zero runs, which this packs at memcpy
    speed; anything else lands close to raw size and falls back.
    """

    name = "wordrle"

    def compress(self, data):
        return kernels.rle_compress(data)

    def decompress(self, payload, orig_len):
        return kernels.rle_decompress(payload, orig_len)


CODECS = {"zlib": ZlibCodec, "wordrle": WordRleCodec}


def make_codec(name, **kwargs):
    try:
        return CODECS[name](**kwargs)
    except KeyError:
        raise ConfigError(f"unknown codec {name!r}; have {sorted(CODECS)}")


class BackendSlot:
    __slots__ = ("kind", "payload", "crc", "raw")

    def __init__(self, kind, payload, crc, raw=False):
        self.kind = kind
        self.payload = payload
        self.crc = crc
        self.raw = raw


@dataclass
class BackendStats:
    stored_mp: int
    zero_mp: int
    compressed_mp: int
    payload_bytes: int
    crc_bytes: int

    @property
    def footprint_bytes(self):
        return self.payload_bytes + self.crc_bytes


class Backend:
    """Slot store; reentrant for distinct slots, counters under one lock."""

    def __init__(self, mp_size, codec=None, capacity_bytes=None):
        self.mp_size = mp_size
        self.codec = codec or ZlibCodec()
        self.capacity_bytes = capacity_bytes
        self._zero_page = zero_page(mp_size)
        self._zero_crc = zlib.crc32(self._zero_page)
        self._zero_slot = BackendSlot(KIND_ZERO, b"", self._zero_crc)
        self._lock = threading.Lock()
        self._stored = 0
        self._zero = 0
        self._compressed = 0
        self._payload_bytes = 0

    def store(self, mp_bytes):
        if len(mp_bytes) != self.mp_size:
            raise ConfigError(
                f"store requires exactly {self.mp_size} bytes, "
                f"got {len(mp_bytes)}")
        is_zero, crc = kernels.scan_page(mp_bytes)
        if is_zero:
            with self._lock:
                self._stored += 1
                self._zero += 1
            return self._zero_slot
        payload = self.codec.compress(mp_bytes)
        raw = len(payload) >= self.mp_size
        if raw:
            payload = bytes(mp_bytes)
        with self._lock:
            if self.capacity_bytes is not None and \
                    self._payload_bytes + len(payload) > self.capacity_bytes:
                raise BackendFull(
                    f"backend at capacity {self.capacity_bytes} bytes")
            self._stored += 1
            self._compressed += 1
            self._payload_bytes += len(payload)
        return BackendSlot(KIND_COMPRESSED, payload, crc, raw)

    def load(self, slot):
        if slot.kind == KIND_ZERO:
            if slot.crc != self._zero_crc:
                raise CorruptionError("zero slot CRC mismatch")
            return self._zero_page
        if slot.raw:
            data = slot.payload
        else:
            try:
                data = self.codec.decompress(slot.payload, self.mp_size)
            except CorruptionError:
                raise
            except Exception as exc:
                raise CorruptionError(f"payload undecodable: {exc}") from exc
        if len(data) != self.mp_size or zlib.crc32(data) != slot.crc:
            raise CorruptionError("CRC mismatch on swap-in")
        return data

    def release(self, slot):
        """Retire a slot after its page is restored."""
        with self._lock:
            self._stored -= 1
            if slot.kind == KIND_ZERO:
                self._zero -= 1
            else:
                self._compressed -= 1
                self._payload_bytes -= len(slot.payload)

    def stats(self):
        with self._lock:
            return BackendStats(self._stored, self._zero, self._compressed,
                                self._payload_bytes,
                                CRC_BYTES_PER_MP * self._stored)
