import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ofec.core import (ChunkAddress, Interleaver, OfecEncoder, OfecParams, coupled_position,
                       default_params, interleave_block, source_chunk, transpose_perm)
from ofec.galois_bch import BddTag, EbchCode

P = default_params()


def test_default_parameters():
    assert (P.B, P.N, P.depth, P.guard, P.K, P.P) == (16, 128, 8, 2, 111, 17)
    assert P.K + P.P == P.N and P.N == P.code.n // 2
    assert P.rate == pytest.approx(111 / 128)


def test_source_chunk_staircase():
    small = OfecParams(B=32, N=128)  # depth 4
    assert small.depth == 4
    assert small.source_chunk(100, 0) == 94 and small.source_chunk(100, 3) == 97
    assert source_chunk(100, 0) == 90 and source_chunk(100, 7) == 97
    with pytest.raises(ValueError):
        P.source_chunk(0, 8)


def test_interleave_examples():
    B = P.B
    assert not interleave_block(np.zeros((B, 2 * B), dtype=np.uint8)).any()
    blk = np.zeros((B, 2 * B), dtype=np.uint8)
    blk[3, 5] = 1
    out = interleave_block(blk)
    assert out.sum() == 1 and out[5, B + 3] == 1
    blk = np.zeros((B, 2 * B), dtype=np.uint8)
    blk[3, B + 5] = 1
    out = interleave_block(blk)
    assert out.sum() == 1 and out[5, 3] == 1
    with pytest.raises(ValueError):
        interleave_block(np.zeros((B, B)))


def test_interleave_roundtrip():
    rng = np.random.default_rng(0)
    il = P.interleaver
    for _ in range(1000):
        blk = rng.integers(0, 2, (P.B, 2 * P.B), dtype=np.uint8)
        assert np.array_equal(il.invert(il.apply(blk)), blk)


def test_custom_interleaver_must_be_bijection():
    with pytest.raises(ValueError):
        Interleaver(4, sigma=np.zeros(16, dtype=int))


def test_coupled_position_example():
    assert coupled_position((5, 0, 0)) == ChunkAddress(15, 0, 16)


def test_coupled_position_bijection_and_image():
    rng = np.random.default_rng(1)
    seen = {}
    offsets = set()
    for _ in range(20000):
        a = ChunkAddress(int(rng.integers(-50, 50)), int(rng.integers(P.N)), int(rng.integers(P.cols)))
        v = coupled_position(a)
        offsets.add(v.chunk - a.chunk)
        assert (a.col < P.B) != (v.col < P.B)
        assert P.home_position(v) == a
        assert seen.setdefault(v, a) == a
    assert offsets == set(range(3, P.depth + 3))


def test_coupling_map_is_a_permutation_of_virtual_slots():
    # every (offset, virtual row, virtual col) is hit exactly once per chunk
    slots = {(P.cmap_off[r, c], P.cmap_row[r, c], P.cmap_col[r, c])
             for r in range(P.N) for c in range(P.cols)}
    assert len(slots) == P.N * P.cols
    assert {(r, c) for _, r, c in slots} == {(r, c) for r in range(P.N) for c in range(P.cols)}


@settings(max_examples=300)
@given(st.integers(-1000, 1000), st.integers(0, 127), st.integers(0, 31))
def test_property_coupling(i, row, col):
    v = coupled_position((i, row, col))
    assert v.chunk == i + P.depth + P.guard - row // P.B
    assert P.home_position(v) == (i, row, col)


def test_encode_zero():
    enc = OfecEncoder()
    assert not enc.encode_chunk(np.zeros((P.K, P.cols), dtype=np.uint8)).any()


def encode_stream(n, seed=0, params=P):
    rng = np.random.default_rng(seed)
    enc = OfecEncoder(params)
    return [enc.encode_chunk(rng.integers(0, 2, (params.K, params.cols), dtype=np.uint8))
            for _ in range(n)]


def assemble(chunks, i, params=P):
    def get(j):
        return chunks[j] if j >= 0 else np.zeros((params.N, params.cols), dtype=np.uint8)
    virt = params.virtual_chunk(get, i)
    return np.concatenate([virt, chunks[i]], axis=0).T


def test_encoder_validity_and_layout():
    chunks = encode_stream(60, seed=2)
    rng = np.random.default_rng(3)
    info = rng.integers(0, 2, (P.K, P.cols), dtype=np.uint8)
    for i in range(60):
        for cw in assemble(chunks, i):
            assert P.code.bdd_decode(cw).tag == BddTag.ALREADY_CODEWORD
    # transmitted half: info rows below parity rows
    enc = OfecEncoder()
    x = enc.encode_chunk(info)
    assert np.array_equal(x[:P.K], info)


def test_coupled_bits_reappear_in_virtual_chunk():
    chunks = encode_stream(40, seed=4)
    rng = np.random.default_rng(5)
    for _ in range(500):
        i, r, c = int(rng.integers(0, 25)), int(rng.integers(P.N)), int(rng.integers(P.cols))
        v = coupled_position((i, r, c))
        virt = assemble(chunks, v.chunk)[v.col][:P.N]
        assert virt[v.row] == chunks[i][r, c]


def test_guard_chunks_not_read():
    enc = OfecEncoder()
    zeros = np.zeros((P.K, P.cols), dtype=np.uint8)
    for _ in range(12):
        enc.encode_chunk(zeros)
    i = enc.next_index
    # poison the two guard chunks; the next chunk must not change
    enc._history[i - 1] = np.ones_like(enc._history[i - 1])
    enc._history[i - 2] = np.ones_like(enc._history[i - 2])
    assert not enc.encode_chunk(zeros).any()


def test_encoder_missing_history():
    enc = OfecEncoder(start=5)
    with pytest.raises(KeyError):
        enc.encode_chunk(np.zeros((P.K, P.cols), dtype=np.uint8))


def test_small_geometry_encoder():
    small = OfecParams(B=4, N=16, code=EbchCode(5))
    assert (small.K, small.depth) == (5, 4)
    chunks = encode_stream(20, seed=6, params=small)
    for i in range(20):
        for cw in assemble(chunks, i, small):
            assert small.code.is_codeword(cw)


def test_params_validation():
    with pytest.raises(ValueError):
        OfecParams(B=16, N=64)
    with pytest.raises(ValueError):
        OfecParams(B=12, N=128)


def test_transpose_perm_involution():
    p = transpose_perm(5)
    assert np.array_equal(p[p], np.arange(25))
