# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel implementations.

Must stay byte-identical to kernels/pure.py; tests/test_kernels.py
cross-checks every function against the pure versions.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AS_STRING
from libc.stdint cimport uint8_t, uint16_t, uint32_t, uint64_t
from libc.string cimport memcpy, memset

import numpy as np

cdef extern from "zlib.h":
    unsigned long crc32(unsigned long crc, const unsigned char *buf,
                        unsigned int length) nogil

cdef uint64_t GOLD_C = 0x9E3779B97F4A7C15UL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9UL
cdef uint64_t M2 = 0x94D049BB133111EBUL


cdef inline uint64_t mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


def zero_mask(seed, start_idx, count, threshold):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t start = <uint64_t>(start_idx & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t thr = <uint64_t>(threshold & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = count, i
    out = np.empty(n, dtype=np.bool_)
    cdef uint8_t[::1] view = out.view(np.uint8)
    with nogil:
        for i in range(n):
            view[i] = mix(s + (start + <uint64_t>i + 1) * GOLD_C) < thr
    return out


def synth_pages(seed, indices, mp_size, prefix_len):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    arr = np.ascontiguousarray(indices, dtype=np.uint64)
    cdef const uint64_t[::1] idx = arr
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t psize = mp_size, plen = prefix_len
    cdef Py_ssize_t nwords = (plen + 7) // 8
    obj = PyBytes_FromStringAndSize(NULL, n * psize)
    cdef uint8_t *out = <uint8_t *>PyBytes_AS_STRING(obj)
    cdef Py_ssize_t i, j
    cdef uint64_t key, w
    cdef uint8_t *page
    cdef uint8_t tmp[8]
    cdef Py_ssize_t full_words, tail
    with nogil:
        memset(out, 0, n * psize)
        if plen > 0:
            full_words = plen // 8
            tail = plen - full_words * 8
            for i in range(n):
                page = out + i * psize
                key = mix(s + (idx[i] + 1) * GOLD_C)
                for j in range(full_words):
                    w = mix(key + (<uint64_t>j + 1) * GOLD_C)
                    # little-endian store
                    memcpy(page + j * 8, &w, 8)
                if tail:
                    w = mix(key + (<uint64_t>full_words + 1) * GOLD_C)
                    memcpy(tmp, &w, 8)
                    memcpy(page + full_words * 8, tmp, tail)
    return obj


def scan_page(const uint8_t[::1] buf):
    cdef Py_ssize_t n = buf.shape[0], i = 0
    cdef bint zero = True
    cdef unsigned long c
    cdef const uint8_t *p
    if n == 0:
        return True, 0
    p = &buf[0]
    with nogil:
        while i + 8 <= n:
            if (<const uint64_t *>(p + i))[0] != 0:
                zero = False
                break
            i += 8
        if zero:
            while i < n:
                if p[i] != 0:
                    zero = False
                    break
                i += 1
        c = crc32(0, p, <unsigned int>n)
    return bool(zero), <uint32_t>c


def rle_compress(const uint8_t[::1] buf):
    cdef Py_ssize_t nbytes = buf.shape[0]
    if nbytes % 8:
        raise ValueError("word-RLE input must be a multiple of 8 bytes")
    cdef Py_ssize_t n = nbytes // 8
    if n == 0:
        return b""
    cdef const uint64_t *words = <const uint64_t *>&buf[0]
    # worst case: every word a 1-word literal segment (4 + 8 bytes each)
    scratch = PyBytes_FromStringAndSize(NULL, n * 12 + 4)
    cdef uint8_t *out = <uint8_t *>PyBytes_AS_STRING(scratch)
    cdef Py_ssize_t i = 0, opos = 0, lit_start
    cdef uint16_t z, lit
    with nogil:
        while i < n:
            z = 0
            while i < n and words[i] == 0 and z < 0xFFFF:
                z += 1
                i += 1
            lit_start = i
            lit = 0
            while i < n and words[i] != 0 and lit < 0xFFFF:
                lit += 1
                i += 1
            out[opos] = z & 0xFF
            out[opos + 1] = z >> 8
            out[opos + 2] = lit & 0xFF
            out[opos + 3] = lit >> 8
            opos += 4
            if lit:
                memcpy(out + opos, <const uint8_t *>(words + lit_start),
                       <size_t>lit * 8)
                opos += <Py_ssize_t>lit * 8
    return scratch[:opos]


def rle_decompress(const uint8_t[::1] buf, orig_len):
    cdef Py_ssize_t n = buf.shape[0]
    cdef Py_ssize_t olen = orig_len
    obj = PyBytes_FromStringAndSize(NULL, olen)
    cdef uint8_t *out = <uint8_t *>PyBytes_AS_STRING(obj)
    cdef const uint8_t *src
    cdef Py_ssize_t pos = 0, off = 0
    cdef Py_ssize_t z, lit
    cdef bint bad = False
    if n == 0 and olen == 0:
        return obj
    src = &buf[0] if n else NULL
    with nogil:
        memset(out, 0, olen)
        while off < olen:
            if pos + 4 > n:
                bad = True
                break
            z = src[pos] | (<Py_ssize_t>src[pos + 1] << 8)
            lit = src[pos + 2] | (<Py_ssize_t>src[pos + 3] << 8)
            pos += 4
            off += z * 8
            if lit:
                if pos + lit * 8 > n or off + lit * 8 > olen:
                    bad = True
                    break
                memcpy(out + off, src + pos, <size_t>lit * 8)
                pos += lit * 8
                off += lit * 8
            if off > olen:
                bad = True
                break
    if bad:
        raise ValueError("corrupt word-RLE stream")
    if pos != n:
        raise ValueError("trailing bytes in word-RLE stream")
    return obj
