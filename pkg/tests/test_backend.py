import random
import zlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elasmem.backend import (Backend, BackendSlot, KIND_COMPRESSED, KIND_ZERO,
                             WordRleCodec, ZlibCodec, make_codec)
from elasmem.content import Corpus, calibrate_prefix
from elasmem.errors import BackendFull, ConfigError, CorruptionError
from elasmem.mem_model import Geometry

PAGE = 4096


def page_of(pattern):
    return (pattern * (PAGE // len(pattern) + 1))[:PAGE]


class TestStore:
    def test_zero_page_has_empty_payload(self):
        be = Backend(PAGE)
        slot = be.store(bytes(PAGE))
        assert slot.kind == KIND_ZERO
        assert slot.payload == b""
        assert be.stats().payload_bytes == 0

    def test_incompressible_random_page_falls_back_to_raw(self):
        # fixed-seed uniform random bytes: deflate cannot shrink them
        data = random.Random(99).randbytes(PAGE)
        assert len(zlib.compress(data, 1)) > PAGE  # measured premise
        be = Backend(PAGE)
        slot = be.store(data)
        assert slot.kind == KIND_COMPRESSED and slot.raw
        assert len(slot.payload) == PAGE

    def test_compressible_page_shrinks(self):
        be = Backend(PAGE)
        slot = be.store(page_of(b"abcd"))
        assert slot.kind == KIND_COMPRESSED and not slot.raw
        assert 0 < len(slot.payload) < PAGE

    def test_wrong_size_rejected(self):
        be = Backend(PAGE)
        with pytest.raises(ConfigError):
            be.store(b"x" * 100)

    def test_capacity_exhaustion(self):
        be = Backend(PAGE, capacity_bytes=PAGE)
        be.store(random.Random(5).randbytes(PAGE))
        be.store(bytes(PAGE))  # zero pages cost nothing
        with pytest.raises(BackendFull):
            be.store(random.Random(6).randbytes(PAGE))


class TestLoad:
    def test_zero_round_trip(self):
        be = Backend(PAGE)
        slot = be.store(bytes(PAGE))
        out = be.load(slot)
        assert out == bytes(PAGE)
        assert zlib.crc32(out) == slot.crc

    def test_bit_flip_detected(self):
        be = Backend(PAGE)
        slot = be.store(page_of(b"hello world "))
        corrupted = bytearray(slot.payload)
        corrupted[len(corrupted) // 2] ^= 0x40
        bad = BackendSlot(slot.kind, bytes(corrupted), slot.crc, slot.raw)
        with pytest.raises(CorruptionError):
            be.load(bad)

    def test_zero_slot_crc_guard(self):
        be = Backend(PAGE)
        bad = BackendSlot(KIND_ZERO, b"", 0xDEAD)
        with pytest.raises(CorruptionError):
            be.load(bad)

    def test_undecodable_payload(self):
        be = Backend(PAGE)
        bad = BackendSlot(KIND_COMPRESSED, b"\x00\x01garbage", 0, raw=False)
        with pytest.raises(CorruptionError):
            be.load(bad)


page_bytes = st.binary(max_size=PAGE).map(lambda b: b + bytes(PAGE - len(b)))


@settings(max_examples=150, deadline=None)
@given(page_bytes)
def test_round_trip_identity(data):
    for codec in (ZlibCodec(), WordRleCodec()):
        be = Backend(PAGE, codec=codec)
        assert be.load(be.store(data)) == data


@settings(max_examples=150, deadline=None)
@given(page_bytes)
def test_zero_detection_completeness(data):
    be = Backend(PAGE)
    slot = be.store(data)
    assert (slot.kind == KIND_ZERO) == (data == bytes(PAGE))


def test_round_trip_many_random_pages():
    rng = random.Random(42)
    be = Backend(PAGE, codec=WordRleCodec())
    for _ in range(200):
        kind = rng.random()
        if kind < 0.3:
            data = bytes(PAGE)
        elif kind < 0.6:
            n = rng.randrange(PAGE)
            data = rng.randbytes(n) + bytes(PAGE - n)
        else:
            data = rng.randbytes(PAGE)
        assert be.load(be.store(data)) == data


class TestStats:
    def test_empty(self):
        s = Backend(PAGE).stats()
        assert (s.stored_mp, s.zero_mp, s.compressed_mp,
                s.payload_bytes, s.crc_bytes) == (0, 0, 0, 0, 0)

    def test_crc_accounting_is_4_bytes_per_mp(self):
        be = Backend(PAGE)
        for i in range(10):
            be.store(bytes(PAGE) if i % 2 else page_of(b"zz" + bytes([i])))
        assert be.stats().crc_bytes == 4 * 10

    def test_release_retires_counters(self):
        be = Backend(PAGE)
        slots = [be.store(page_of(b"abc")), be.store(bytes(PAGE))]
        for s in slots:
            be.release(s)
        st_ = be.stats()
        assert st_.stored_mp == 0 and st_.payload_bytes == 0

    def test_footprint_never_exceeds_raw(self):
        rng = random.Random(8)
        be = Backend(PAGE)
        for _ in range(50):
            be.store(rng.randbytes(PAGE))
        s = be.stats()
        assert s.payload_bytes <= s.stored_mp * PAGE


class TestCorpusFootprint:
    @pytest.mark.parametrize("codec_name", ["zlib", "wordrle"])
    def test_survey_corpus_footprint(self, codec_name):
        """76.79% zero pages + 47.63%-compressible remainder: the stored
        footprint lands near 0.2321 * 0.4763 of the raw bytes."""
        geo = Geometry.scaled(phys_ms_count=64)
        codec = make_codec(codec_name)
        corpus = Corpus(geo, seed=11, zero_ratio=0.7679,
                        compress_target=0.4763, codec=codec)
        be = Backend(geo.mp_size, codec=codec)
        total = 0
        for gfn in range(48):
            for page in corpus.ms_bytes(gfn):
                be.store(page)
                total += geo.mp_size
        s = be.stats()
        expect = 0.2321 * 0.4763 * total
        assert abs(s.payload_bytes - expect) / expect < 0.05
        zero_frac = s.zero_mp / s.stored_mp
        assert abs(zero_frac - 0.7679) < 0.03


def test_calibrate_prefix_extremes():
    geo = Geometry.scaled()
    assert calibrate_prefix(WordRleCodec(), geo.mp_size, 1.0) == geo.mp_size
    assert calibrate_prefix(WordRleCodec(), geo.mp_size, 0.0) == 0
    mid = calibrate_prefix(WordRleCodec(), geo.mp_size, 0.5)
    assert 0 < mid < geo.mp_size


def test_unknown_codec_rejected():
    with pytest.raises(ConfigError):
        make_codec("lz77-from-scratch")
