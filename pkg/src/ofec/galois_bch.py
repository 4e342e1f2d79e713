"""GF(2^m) arithmetic and the double-error-correcting extended BCH component code.

The default instance is the (256, 239) eBCH code over GF(2^8) with modulus
x^8 + x^4 + x^3 + x^2 + 1. Smaller instances (m=4, m=5) back the product-code
toy model.

Codeword layout (bit index == polynomial degree for the BCH part)::

    0 .. k-1        message bits
    k .. n-2        BCH parity (deg g bits)
    n-1             overall even-parity bit
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache

import numpy as np

PRIMITIVE_POLYS = {
    4: 0b10011,       # x^4 + x + 1
    5: 0b100101,      # x^5 + x^2 + 1
    8: 0b100011101,   # x^8 + x^4 + x^3 + x^2 + 1
}


class GaloisField:
    """GF(2^m) with log/antilog tables."""

    def __init__(self, m=8, primitive_poly=None):
        self.m = m
        self.primitive_poly = PRIMITIVE_POLYS[m] if primitive_poly is None else primitive_poly
        self.size = 1 << m
        self.order = self.size - 1
        self.exp = np.zeros(2 * self.order, dtype=np.int64)
        self.log = np.full(self.size, -1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            self.exp[i] = x
            if self.log[x] != -1:
                raise ValueError(f"{self.primitive_poly:#x} is not primitive")
            self.log[x] = i
            x <<= 1
            if x & self.size:
                x ^= self.primitive_poly
        self.exp[self.order:] = self.exp[:self.order]

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def mul_clmul(self, a, b):
        """Shift-and-add multiply with modular reduction (table-free)."""
        r = 0
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if a & self.size:
                a ^= self.primitive_poly
        return r

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(2^m)")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if a == 0:
            return 0 if e else 1
        return int(self.exp[(self.log[a] * e) % self.order])

    def alpha(self, e):
        return int(self.exp[e % self.order])

    def mul_table(self):
        """Full size x size product table."""
        la = self.log
        out = np.zeros((self.size, self.size), dtype=np.int64)
        nz = np.arange(1, self.size)
        idx = la[nz][:, None] + la[nz][None, :]
        out[1:, 1:] = self.exp[idx]
        return out


def gf_mul(a, b, gf=None):
    """Product of two GF(2^8) elements (default modulus 0x11D)."""
    return (gf or _default_field()).mul(a, b)


@lru_cache(maxsize=None)
def _default_field():
    return GaloisField(8)


class BddTag(IntEnum):
    ALREADY_CODEWORD = 0
    CORRECTED = 1
    FAILED = 2


@dataclass(frozen=True)
class BddOutcome:
    tag: BddTag
    flipped_positions: tuple = ()


def _poly_mul_gf2(a, b):
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
    return r


def _poly_mod_gf2(a, g):
    dg = g.bit_length() - 1
    while a and a.bit_length() - 1 >= dg:
        a ^= g << (a.bit_length() - 1 - dg)
    return a


def minimal_polynomial(field, e):
    """Minimal polynomial of alpha^e over GF(2), as an integer bit mask."""
    conj = []
    x = e % field.order
    while x not in conj:
        conj.append(x)
        x = (2 * x) % field.order
    # prod (X + alpha^c) with coefficients in GF(2^m)
    coeffs = [1]
    for c in conj:
        root = field.alpha(c)
        nxt = [0] * (len(coeffs) + 1)
        for d, a in enumerate(coeffs):
            nxt[d + 1] ^= a
            nxt[d] ^= field.mul(a, root)
        coeffs = nxt
    if any(a not in (0, 1) for a in coeffs):
        raise ArithmeticError("minimal polynomial has non-binary coefficients")
    return sum(a << d for d, a in enumerate(coeffs))


@dataclass
class EbchCode:
    """Extended BCH code with t=2 over GF(2^m), systematic, closed-form BDD."""

    m: int = 8
    primitive_poly: int | None = None
    gf: GaloisField = field(init=False, repr=False)

    t = 2
    d_min = 6

    def __post_init__(self):
        self.gf = GaloisField(self.m, self.primitive_poly)
        self.primitive_poly = self.gf.primitive_poly
        gf = self.gf
        self.n = gf.size
        self.n_bch = gf.order
        self.generator = _poly_mul_gf2(minimal_polynomial(gf, 1), minimal_polynomial(gf, 3))
        self.n_parity_bch = self.generator.bit_length() - 1
        self.k = self.n_bch - self.n_parity_bch
        self._build_parity_matrix()
        self._build_syndrome_columns()
        self._build_quadratic_table()
        self._decode_table = None

    # ------------------------------------------------------------------ encode
    def _build_parity_matrix(self):
        r, k = self.n_parity_bch, self.k
        pm = np.zeros((k, r), dtype=np.uint8)
        for d in range(k):
            rem = _poly_mod_gf2(1 << (d + r), self.generator)
            for e in range(r):
                pm[d, e] = (rem >> e) & 1
        self.parity_matrix = pm

    @property
    def generator_coefficients(self):
        return [(self.generator >> d) & 1 for d in range(self.n_parity_bch + 1)]

    def encode(self, message):
        """Systematic encoding; accepts (..., k) bit arrays."""
        msg = np.asarray(message, dtype=np.uint8)
        if msg.shape[-1] != self.k:
            raise ValueError(f"message length {msg.shape[-1]} != k={self.k}")
        par = (msg.astype(np.int64) @ self.parity_matrix) & 1
        body = np.concatenate([msg, par.astype(np.uint8)], axis=-1)
        overall = body.sum(axis=-1, keepdims=True, dtype=np.int64) & 1
        return np.concatenate([body, overall.astype(np.uint8)], axis=-1)

    def is_codeword(self, word):
        return self.syndrome_int(word) == 0

    # ---------------------------------------------------------------- syndrome
    def _build_syndrome_columns(self):
        gf, m = self.gf, self.m
        cols = np.zeros(self.n, dtype=np.int64)
        for p in range(self.n_bch):
            cols[p] = gf.alpha(p) | (gf.alpha(3 * p) << m) | (1 << (2 * m))
        cols[self.n - 1] = 1 << (2 * m)
        self.syndrome_columns = cols

    def pack(self, s1, s3, parity):
        return s1 | (s3 << self.m) | (parity << (2 * self.m))

    def unpack(self, syn):
        mask = self.gf.order
        return syn & mask, (syn >> self.m) & mask, (syn >> (2 * self.m)) & 1

    def syndrome_int(self, word):
        word = np.asarray(word)
        if word.shape[-1] != self.n:
            raise ValueError(f"word length {word.shape[-1]} != n={self.n}")
        return int(np.bitwise_xor.reduce(self.syndrome_columns[np.flatnonzero(word)], initial=0))

    def compute_syndromes(self, word):
        """(S1, S3, overall parity) of a length-n word."""
        return self.unpack(self.syndrome_int(word))

    # ------------------------------------------------------------------ decode
    def _build_quadratic_table(self):
        # root of y^2 + y = c, or -1 when the trace of c is 1
        gf = self.gf
        tab = np.full(gf.size, -1, dtype=np.int64)
        for y in range(gf.size):
            c = gf.mul(y, y) ^ y
            if tab[c] < 0:
                tab[c] = y
        self._quad_root = tab

    def decode_syndrome(self, s1, s3, parity):
        """Closed-form t=2 decoding from syndromes; returns a BddOutcome."""
        gf = self.gf
        last = self.n - 1
        if s1 == 0:
            if s3 != 0:
                return BddOutcome(BddTag.FAILED)
            if parity == 0:
                return BddOutcome(BddTag.ALREADY_CODEWORD)
            return BddOutcome(BddTag.CORRECTED, (last,))
        s1_cubed = gf.mul(s1, gf.mul(s1, s1))
        if s3 == s1_cubed:
            p = int(gf.log[s1])
            if parity == 1:
                return BddOutcome(BddTag.CORRECTED, (p,))
            return BddOutcome(BddTag.CORRECTED, (p, last))
        # X1 + X2 = S1, X1 X2 = S3/S1 + S1^2; substitute X = S1 y
        c = gf.div(s3, s1_cubed) ^ 1
        y = int(self._quad_root[c])
        if y < 0 or parity == 1:
            return BddOutcome(BddTag.FAILED)
        x1 = gf.mul(s1, y)
        x2 = x1 ^ s1
        return BddOutcome(BddTag.CORRECTED, tuple(sorted((int(gf.log[x1]), int(gf.log[x2])))))

    def bdd_decode(self, word):
        """Bounded-distance decode a length-n word. The input is not modified."""
        return self.decode_syndrome(*self.compute_syndromes(word))

    def decode_table(self):
        """Outcome lookup over all packed syndromes: (tags, pos0, pos1).

        Entries of pos0/pos1 are -1 where unused.
        """
        if self._decode_table is None:
            size = 1 << (2 * self.m + 1)
            tags = np.empty(size, dtype=np.int8)
            pos = np.full((size, 2), -1, dtype=np.int16)
            for syn in range(size):
                out = self.decode_syndrome(*self.unpack(syn))
                tags[syn] = out.tag
                pos[syn, :len(out.flipped_positions)] = out.flipped_positions
            self._decode_table = (tags, np.ascontiguousarray(pos[:, 0]), np.ascontiguousarray(pos[:, 1]))
        return self._decode_table


@lru_cache(maxsize=None)
def default_code(m=8):
    return EbchCode(m)


def ebch_encode(message, code=None):
    return (code or default_code()).encode(message)


def compute_syndromes(word, code=None):
    return (code or default_code()).compute_syndromes(word)


def bdd_decode(word, code=None):
    return (code or default_code()).bdd_decode(word)
