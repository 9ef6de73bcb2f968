"""Byte-crunching kernels with a compiled fast path.

The hot loops of the engine are page-granular and stateless: synthesizing
deterministic page contents for the workload corpus, classifying pages as
zero/nonzero while checksumming them, and packing pages with the word-RLE
codec. They are implemented twice — in Cython (``_native``) and in
numpy/zlib (``pure``) — with bit-identical outputs, so an install without
a C toolchain behaves the same, only slower. ``benchmarks/bench_kernels.py``
compares the two.

Set ELASMEM_PURE_KERNELS=1 to force the pure implementation.
"""

import os

from . import pure

# Shared stream constants (splitmix64 finalizer over a counter).
GOLD = pure.GOLD
MASK64 = pure.MASK64

mix64 = pure.mix64

if os.environ.get("ELASMEM_PURE_KERNELS"):
    _impl = pure
    IMPL = "pure"
else:
    try:
        from . import _native as _impl
        IMPL = "native"
    except ImportError:
        _impl = pure
        IMPL = "pure"

zero_mask = _impl.zero_mask
synth_pages = _impl.synth_pages
scan_page = _impl.scan_page
rle_compress = _impl.rle_compress
rle_decompress = _impl.rle_decompress


def implementations():
    """All importable kernel implementations, keyed by name."""
    impls = {"pure": pure}
    try:
        from . import _native
        impls["native"] = _native
    except ImportError:
        pass
    return impls
