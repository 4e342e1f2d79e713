"""Compiled inner loops shared by the iBDD and SPR layers.

Buffers are rings of M chunk slots; chunk i lives in slot i % M. Each
component codeword carries a packed syndrome (S1 | S3 << m | parity << 2m)
kept current under every bit flip, so a BDD call is one table lookup.
"""

import numba as nb
import numpy as np

ALREADY, CORRECTED, FAILED = 0, 1, 2


@nb.njit(cache=True)
def flip_bit(bits, syn, M, N, H, cmap_off, cmap_row, cmap_col, buf_hi, i, r, c):
    s = i % M
    bits[s, r, c] ^= 1
    syn[s, c] ^= H[N + r]
    i2 = i + cmap_off[r, c]
    if i2 <= buf_hi:
        syn[i2 % M, cmap_col[r, c]] ^= H[cmap_row[r, c]]


@nb.njit(cache=True)
def bdd_sweep(bits, syn, flags, M, N, B, H, tags, pos0, pos1,
              cmap_off, cmap_row, cmap_col, vmap_off, vmap_row, vmap_col,
              lo, hi, half, top_only, frozen_below, buf_hi):
    """One oldest-to-newest BDD sweep over codewords of chunks lo..hi.

    half < 0 decodes every column, otherwise only columns of that half-chunk.
    top_only discards flips that land in the virtual half (MRBDD).
    Flips whose home chunk is below frozen_below are discarded.
    Returns the number of bits flipped.
    """
    nflips = 0
    c0 = 0 if half < 0 else half * B
    c1 = 2 * B if half < 0 else half * B + B
    for i in range(lo, hi + 1):
        s = i % M
        for c in range(c0, c1):
            sy = syn[s, c]
            tag = tags[sy]
            flags[s, c] = tag
            if tag != CORRECTED:
                continue
            q0 = pos0[sy]
            q1 = pos1[sy]
            for q in (q0, q1):
                if q < 0:
                    continue
                if q >= N:
                    flip_bit(bits, syn, M, N, H, cmap_off, cmap_row, cmap_col, buf_hi, i, q - N, c)
                    nflips += 1
                elif not top_only:
                    hc = i - vmap_off[q, c]
                    if hc >= frozen_below:
                        flip_bit(bits, syn, M, N, H, cmap_off, cmap_row, cmap_col, buf_hi,
                                 hc, vmap_row[q, c], vmap_col[q, c])
                        nflips += 1
    return nflips


@nb.njit(cache=True)
def flag_rule_flip(bits, syn, flags, M, N, B, H, cmap_off, cmap_row, cmap_col,
                   lo, hi, half, main_mask, virt_mask, flag_hi, buf_hi, out_cols):
    """Flip every bit of chunks lo..hi whose main-codeword tag is in main_mask
    and whose coupled-codeword tag is in virt_mask (bit masks over tags).

    Coupled codewords beyond flag_hi count as ALREADY. out_cols[i-lo, c] is
    set to 1 for every column that received a flip. Returns the flip count.
    """
    nflips = 0
    c0 = 0 if half < 0 else half * B
    c1 = 2 * B if half < 0 else half * B + B
    for i in range(lo, hi + 1):
        s = i % M
        for c in range(c0, c1):
            if not (main_mask >> flags[s, c]) & 1:
                continue
            for r in range(N):
                i2 = i + cmap_off[r, c]
                vt = ALREADY
                if i2 <= flag_hi:
                    vt = flags[i2 % M, cmap_col[r, c]]
                if (virt_mask >> vt) & 1:
                    flip_bit(bits, syn, M, N, H, cmap_off, cmap_row, cmap_col, buf_hi, i, r, c)
                    out_cols[i - lo, c] = 1
                    nflips += 1
    return nflips


def warm_up():
    """Trigger compilation on tiny inputs."""
    M, N, B = 2, 2, 1
    bits = np.zeros((M, N, 2 * B), dtype=np.uint8)
    syn = np.zeros((M, 2 * B), dtype=np.int64)
    flags = np.zeros((M, 2 * B), dtype=np.int8)
    H = np.zeros(2 * N, dtype=np.int64)
    tags = np.zeros(1, dtype=np.int8)
    pos = np.full(1, -1, dtype=np.int16)
    z = np.zeros((N, 2 * B), dtype=np.int64)
    bdd_sweep(bits, syn, flags, M, N, B, H, tags, pos, pos, z, z, z, z, z, z, 0, 0, -1, False, 0, 0)
    flag_rule_flip(bits, syn, flags, M, N, B, H, z, z, z, 0, 0, -1, 0, 0, 0, 0,
                   np.zeros((1, 2 * B), dtype=np.uint8))
