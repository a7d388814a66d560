import binascii

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stpcm.crc import (
    CRC_POLYNOMIALS,
    DEFAULT_CRC,
    CrcSpec,
    cascl_select,
    crc_attach,
    crc_bits,
    crc_check,
    crc_check_batch,
    crc_for_width,
)
from stpcm.polar import DecoderPath


def _bits_msb_first(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def _to_int(bits) -> int:
    return int("".join(str(int(b)) for b in bits), 2)


def test_default_check_value():
    assert _to_int(crc_bits(_bits_msb_first(b"123456789"))) == 0x31C3


@given(st.binary(min_size=1, max_size=40))
def test_default_matches_stdlib_crc_hqx(data):
    assert _to_int(crc_bits(_bits_msb_first(data), DEFAULT_CRC)) == binascii.crc_hqx(data, 0)


@pytest.mark.parametrize("width", sorted(CRC_POLYNOMIALS))
@given(payload=st.lists(st.integers(0, 1), min_size=1, max_size=200))
@settings(max_examples=30)
def test_round_trip(width, payload):
    spec = crc_for_width(width)
    block = crc_attach(payload, spec)
    assert len(block) == len(payload) + width
    assert crc_check(block, spec)


@pytest.mark.parametrize("width", sorted(CRC_POLYNOMIALS))
def test_every_single_flip_detected(width):
    spec = crc_for_width(width)
    rng = np.random.default_rng(width)
    for L in (1, 7, 64, 300):
        block = crc_attach(rng.integers(0, 2, L), spec)
        flips = np.tile(block, (len(block), 1))
        flips[np.arange(len(block)), np.arange(len(block))] ^= 1
        assert not crc_check_batch(flips, spec).any()


def test_empty_payload_rejected():
    with pytest.raises(ValueError):
        crc_attach([], DEFAULT_CRC)


def test_short_block_fails():
    assert not crc_check([0] * 16, DEFAULT_CRC)
    assert not crc_check([0] * 3, DEFAULT_CRC)


def test_batch_agrees_with_scalar():
    rng = np.random.default_rng(1)
    blocks = rng.integers(0, 2, (100, 40))
    blocks[::3] = [crc_attach(b[:24]) for b in blocks[::3]]
    expect = [crc_check(b) for b in blocks]
    assert crc_check_batch(blocks).tolist() == expect


def test_init_and_xorout_are_used():
    p = _bits_msb_first(b"123456789")
    # CRC-16/CCITT-FALSE and CRC-16/GENIBUS catalogue check values
    assert _to_int(crc_bits(p, CrcSpec(init=0xFFFF))) == 0x29B1
    assert _to_int(crc_bits(p, CrcSpec(init=0xFFFF, xor_out=0xFFFF))) == 0xD64E


def test_spec_validation():
    with pytest.raises(ValueError):
        CrcSpec(width=0)
    with pytest.raises(ValueError):
        CrcSpec(width=33)
    with pytest.raises(ValueError):
        crc_for_width(5)


def _path(bits, metric):
    return DecoderPath(np.array(bits, dtype=np.uint8), metric)


def test_select_single_passing():
    block = crc_attach([1, 0, 1, 1, 0, 1, 0, 0], CrcSpec(width=8, polynomial=0x07))
    spec = CrcSpec(width=8, polynomial=0x07)
    dec, ok = cascl_select([_path(block, 0.3)], spec, np.arange(len(block)))
    assert ok and np.array_equal(dec, block)


def test_select_prefers_passing_path():
    spec = CrcSpec(width=8, polynomial=0x07)
    good = crc_attach([1, 1, 0, 0, 1, 0, 1, 0], spec)
    bad = good.copy()
    bad[0] ^= 1
    dec, ok = cascl_select([_path(bad, 0.1), _path(good, 2.0)], spec, np.arange(len(good)))
    assert ok and np.array_equal(dec, good)


def test_select_fallback_flags():
    spec = CrcSpec(width=8, polynomial=0x07)
    good = crc_attach([1, 1, 0, 0, 1, 0, 1, 0], spec)
    b1, b2 = good.copy(), good.copy()
    b1[0] ^= 1
    b2[1] ^= 1
    dec, ok = cascl_select([_path(b2, 5.0), _path(b1, 1.0)], spec, np.arange(len(good)))
    assert not ok and np.array_equal(dec, b1)


def test_select_uses_info_positions_only():
    spec = CrcSpec(width=8, polynomial=0x07)
    good = crc_attach([0, 1, 1, 0], spec)
    u = np.zeros(16, np.uint8)
    pos = np.arange(4, 16)
    u[pos] = good
    u[0] = 1  # garbage outside the information positions
    dec, ok = cascl_select([_path(u, 0.0)], spec, pos)
    assert ok


def test_select_rejects_empty():
    with pytest.raises(ValueError):
        cascl_select([], DEFAULT_CRC, [])
