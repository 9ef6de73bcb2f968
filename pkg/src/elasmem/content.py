"""Deterministic synthetic page contents for the simulated guest.

Guest RAM is never materialized: the byte content of page (gfn, mp) is a
pure function of the corpus seed, so a 32 GB production-geometry space
costs nothing until pages are actually swapped. Pages are either all-zero
or carry a pseudo-random prefix whose length is calibrated so the chosen
codec compresses them at the configured target ratio; tests and
trace-driven runs can also write explicit bytes through the address
space's overlay, which shadows the corpus.
"""

import numpy as np

from . import kernels
from .kernels import MASK64, mix64

_SALT_ZERO = 0x7A65726F70616765  # independent stream for the zero decision
_SALT_CONTENT = 0x636F6E74656E74
_PROBE_PAGES = 8

_zero_cache = {}


def zero_page(size):
    """Shared immutable all-zero page of the given size."""
    page = _zero_cache.get(size)
    if page is None:
        page = _zero_cache.setdefault(size, bytes(size))
    return page


def calibrate_prefix(codec, mp_size, target_ratio, seed=0):
    """Prefix length whose codec output is closest to target_ratio * mp_size.

    Output size grows monotonically with the random prefix length for any
    sane codec, so a binary search over probe pages suffices. A target at
    or above 1.0 yields fully random (incompressible) pages.
    """
    if target_ratio >= 1.0:
        return mp_size
    if target_ratio <= 0.0:
        return 0
    goal = target_ratio * mp_size
    probes = np.arange(1, _PROBE_PAGES + 1, dtype=np.uint64)

    def out_size(prefix):
        buf = kernels.synth_pages(mix64(seed ^ _SALT_CONTENT), probes,
                                  mp_size, prefix)
        total = 0
        for i in range(_PROBE_PAGES):
            page = buf[i * mp_size:(i + 1) * mp_size]
            total += min(len(codec.compress(page)), mp_size)
        return total / _PROBE_PAGES

    lo, hi = 0, mp_size
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if out_size(mid) < goal:
            lo = mid
        else:
            hi = mid
    return lo if abs(out_size(lo) - goal) <= abs(out_size(hi) - goal) else hi


class Corpus:
    """Page-content generator with configured zero ratio and compressibility."""

    def __init__(self, geometry, seed=0, zero_ratio=0.0, prefix_len=None,
                 compress_target=1.0, codec=None):
        self.geometry = geometry
        self.seed = seed
        self.zero_ratio = zero_ratio
        self._zseed = mix64((seed ^ _SALT_ZERO) & MASK64)
        self._cseed = mix64((seed ^ _SALT_CONTENT) & MASK64)
        self._zthr = min(int(zero_ratio * 2.0**64), MASK64)
        if prefix_len is None:
            if codec is not None:
                prefix_len = calibrate_prefix(codec, geometry.mp_size,
                                              compress_target, seed)
            else:
                prefix_len = geometry.mp_size
        self.prefix_len = prefix_len
        self._zero = zero_page(geometry.mp_size)

    def _index(self, gfn, mp):
        return gfn * self.geometry.mps_per_ms + mp

    def is_zero(self, gfn, mp):
        idx = self._index(gfn, mp)
        return mix64(self._zseed + (idx + 1) * kernels.GOLD) < self._zthr

    def zero_mask_ms(self, gfn):
        """Bool array over the MPs of one MS."""
        return kernels.zero_mask(self._zseed, self._index(gfn, 0),
                                 self.geometry.mps_per_ms, self._zthr)

    def mp_bytes(self, gfn, mp):
        if self.is_zero(gfn, mp):
            return self._zero
        idx = np.array([self._index(gfn, mp)], dtype=np.uint64)
        return kernels.synth_pages(self._cseed, idx, self.geometry.mp_size,
                                   self.prefix_len)

    def ms_bytes(self, gfn):
        """All MPs of one MS, batch-synthesized; zero MPs share one page."""
        mps = self.geometry.mps_per_ms
        mask = self.zero_mask_ms(gfn)
        nonzero = np.flatnonzero(~mask)
        base = self._index(gfn, 0)
        buf = kernels.synth_pages(self._cseed,
                                  nonzero.astype(np.uint64) + np.uint64(base),
                                  self.geometry.mp_size, self.prefix_len)
        sz = self.geometry.mp_size
        pages = [self._zero] * mps
        for k, mp in enumerate(nonzero.tolist()):
            pages[mp] = buf[k * sz:(k + 1) * sz]
        return pages
