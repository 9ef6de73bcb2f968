"""Pure-Python (numpy + zlib) kernel implementations.

Reference semantics for the native extension: every function here must
produce byte-identical results to its ``_native`` counterpart.
"""

import zlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLD = 0x9E3779B97F4A7C15  # splitmix64 increment
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U_GOLD = np.uint64(GOLD)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)



def mix64(x):
    """splitmix64 finalizer of a single 64-bit value."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix_vec(z):
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


def zero_mask(seed, start_idx, count, threshold):
    """Deterministic zero/nonzero classification for pages [start, start+count).

    Page idx is zero iff mix64(seed + (idx+1)*GOLD) < threshold.
    Returns a bool ndarray of length count.
    """
    # uint64 arithmetic wraps by design
    with np.errstate(over="ignore"):
        idx = np.arange(start_idx + 1, start_idx + count + 1, dtype=np.uint64)
        keys = np.uint64(seed & MASK64) + idx * _U_GOLD
        return _mix_vec(keys) < np.uint64(threshold & MASK64)


def synth_pages(seed, indices, mp_size, prefix_len):
    """Synthesize pages for the given indices as one concatenated buffer.

    Each page is prefix_len pseudo-random bytes (a per-page splitmix64
    stream keyed by seed and index) followed by zeros up to mp_size.
    """
    indices = np.ascontiguousarray(indices, dtype=np.uint64)
    n = len(indices)
    out = np.zeros((n, mp_size), dtype=np.uint8)
    if prefix_len > 0 and n > 0:
        nwords = (prefix_len + 7) // 8
        with np.errstate(over="ignore"):
            keys = _mix_vec(np.uint64(seed & MASK64) + (indices + np.uint64(1)) * _U_GOLD)
            ctr = np.arange(1, nwords + 1, dtype=np.uint64) * _U_GOLD
            words = _mix_vec(keys[:, None] + ctr[None, :])
        raw = words.astype("<u8").view(np.uint8).reshape(n, nwords * 8)
        out[:, :prefix_len] = raw[:, :prefix_len]
    return out.tobytes()


_zero_pages = {}


def scan_page(buf):
    """Classify one page: (is_all_zero, crc32-of-contents)."""
    b = bytes(buf)
    z = _zero_pages.get(len(b))
    if z is None:
        z = _zero_pages.setdefault(len(b), bytes(len(b)))
    return b == z, zlib.crc32(b)


def rle_compress(buf):
    """Word-RLE pack: segments of (u16 zero-run words, u16 literal words, literals).

    Input length must be a multiple of 8. The output is not guaranteed to
    be smaller than the input; callers fall back to raw storage.
    """
    data = bytes(buf)
    if len(data) % 8:
        raise ValueError("word-RLE input must be a multiple of 8 bytes")
    words = np.frombuffer(data, dtype="<u8")
    n = len(words)
    if n == 0:
        return b""
    zero = words == 0
    change = np.flatnonzero(zero[1:] != zero[:-1]) + 1
    bounds = [0, *change.tolist(), n]
    runs = [(bool(zero[bounds[k]]), bounds[k + 1] - bounds[k])
            for k in range(len(bounds) - 1)]
    parts = []
    wpos = 0
    ri = 0
    rem = runs[0][1]
    nruns = len(runs)
    while ri < nruns:
        z = 0
        if runs[ri][0]:
            z = min(rem, 0xFFFF)
            rem -= z
            wpos += z
            if rem == 0:
                ri += 1
                rem = runs[ri][1] if ri < nruns else 0
        lit = 0
        lit_start = wpos
        if ri < nruns and not runs[ri][0]:
            lit = min(rem, 0xFFFF)
            rem -= lit
            wpos += lit
            if rem == 0:
                ri += 1
                rem = runs[ri][1] if ri < nruns else 0
        parts.append(z.to_bytes(2, "little") + lit.to_bytes(2, "little"))
        if lit:
            parts.append(data[lit_start * 8:wpos * 8])
    return b"".join(parts)


def rle_decompress(buf, orig_len):
    """Inverse of rle_compress; orig_len is the uncompressed byte length."""
    data = bytes(buf)
    out = bytearray(orig_len)
    pos = 0
    off = 0
    n = len(data)
    while off < orig_len:
        if pos + 4 > n:
            raise ValueError("truncated word-RLE stream")
        z = int.from_bytes(data[pos:pos + 2], "little")
        lit = int.from_bytes(data[pos + 2:pos + 4], "little")
        pos += 4
        off += z * 8
        if lit:
            end = pos + lit * 8
            if end > n or off + lit * 8 > orig_len:
                raise ValueError("corrupt word-RLE stream")
            out[off:off + lit * 8] = data[pos:end]
            pos = end
            off += lit * 8
        if off > orig_len:
            raise ValueError("corrupt word-RLE stream")
    if pos != n:
        raise ValueError("trailing bytes in word-RLE stream")
    return bytes(out)
