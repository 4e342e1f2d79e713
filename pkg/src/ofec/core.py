"""OFEC spatial-coupling geometry and the streaming encoder.

A chunk X(i) is an N x 2B bit matrix (row 0 at the bottom). Column c of X(i)
is the transmitted top half of component codeword (i, c); the bottom half is
the virtual column c of Y(i), assembled from blocks of chunks
i - depth - guard .. i - guard - 1.

Component codeword index of a bit:
    virtual row v  -> index v            (0 .. N-1)
    chunk row r    -> index N + r        (N .. 2N-1)
so chunk rows 0..K-1 carry information and rows K..N-1 carry parity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .galois_bch import EbchCode, default_code


class ChunkAddress(NamedTuple):
    chunk: int
    row: int
    col: int


def transpose_perm(B):
    """Flat-index permutation of a B x B grid realising the transpose."""
    r, c = np.divmod(np.arange(B * B), B)
    return c * B + r


@dataclass
class Interleaver:
    """Per-block interleaver: [L | R] -> [sigma(R) | tau(L)].

    sigma and tau are flat-index permutations of the B x B grid
    (source index -> destination index). Both default to the transpose.
    """

    B: int
    sigma: np.ndarray | None = None
    tau: np.ndarray | None = None

    def __post_init__(self):
        B = self.B
        self.sigma = transpose_perm(B) if self.sigma is None else np.asarray(self.sigma)
        self.tau = transpose_perm(B) if self.tau is None else np.asarray(self.tau)
        for p in (self.sigma, self.tau):
            if sorted(p.tolist()) != list(range(B * B)):
                raise ValueError("interleaver component is not a bijection on the B x B grid")
        self.sigma_inv = np.argsort(self.sigma)
        self.tau_inv = np.argsort(self.tau)

    @staticmethod
    def _apply(perm, half):
        out = np.empty(half.size, dtype=half.dtype)
        out[perm] = half.reshape(-1)
        return out.reshape(half.shape)

    def apply(self, block):
        B = self.B
        block = np.asarray(block)
        if block.shape != (B, 2 * B):
            raise ValueError(f"block shape {block.shape} != {(B, 2 * B)}")
        left, right = block[:, :B], block[:, B:]
        return np.hstack([self._apply(self.sigma, right), self._apply(self.tau, left)])

    def invert(self, block):
        B = self.B
        block = np.asarray(block)
        if block.shape != (B, 2 * B):
            raise ValueError(f"block shape {block.shape} != {(B, 2 * B)}")
        left, right = block[:, :B], block[:, B:]
        return np.hstack([self._apply(self.tau_inv, right), self._apply(self.sigma_inv, left)])

    def map_bit(self, rho, col):
        """Local (row, col) in the source block -> local (row, col) in the virtual block."""
        B = self.B
        if col < B:
            r, c = divmod(int(self.tau[rho * B + col]), B)
            return r, c + B
        r, c = divmod(int(self.sigma[rho * B + col - B]), B)
        return r, c


@dataclass
class OfecParams:
    B: int = 16
    N: int = 128
    guard: int = 2
    code: EbchCode = field(default_factory=default_code)
    interleaver: Interleaver | None = None

    def __post_init__(self):
        if self.code.n != 2 * self.N:
            raise ValueError(f"N={self.N} must equal n/2={self.code.n // 2}")
        if self.N % self.B:
            raise ValueError("B must divide N")
        if self.K <= 0:
            raise ValueError("component code too short for this N")
        if self.interleaver is None:
            self.interleaver = Interleaver(self.B)
        elif self.interleaver.B != self.B:
            raise ValueError("interleaver block size mismatch")
        self._build_maps()

    @property
    def depth(self):
        return self.N // self.B

    @property
    def K(self):
        return self.code.k - self.N

    @property
    def P(self):
        return self.code.n - self.code.k

    @property
    def cols(self):
        return 2 * self.B

    @property
    def span(self):
        """Largest chunk offset between a bit and its coupled codeword."""
        return self.depth + self.guard

    @property
    def rate(self):
        return self.K / self.N

    def source_chunk(self, i, j):
        if not 0 <= j < self.depth:
            raise ValueError(f"block index {j} outside [0, {self.depth})")
        return i - self.depth - self.guard + j

    def coupled_position(self, addr):
        """Transmitted bit -> (chunk, virtual row, virtual col) of its coupled codeword."""
        i, row, col = addr
        if not (0 <= row < self.N and 0 <= col < self.cols):
            raise ValueError(f"address {addr} outside the chunk")
        j, rho = divmod(row, self.B)
        r, c = self.interleaver.map_bit(rho, col)
        return ChunkAddress(i + self.span - j, j * self.B + r, c)

    def home_position(self, vaddr):
        """Inverse of coupled_position: virtual address -> transmitted home."""
        i, vrow, vcol = vaddr
        off = int(self.vmap_off[vrow, vcol])
        return ChunkAddress(i - off, int(self.vmap_row[vrow, vcol]), int(self.vmap_col[vrow, vcol]))

    def _build_maps(self):
        N, C = self.N, self.cols
        self.cmap_off = np.zeros((N, C), dtype=np.int64)
        self.cmap_row = np.zeros((N, C), dtype=np.int64)
        self.cmap_col = np.zeros((N, C), dtype=np.int64)
        self.vmap_off = np.full((N, C), -1, dtype=np.int64)
        self.vmap_row = np.zeros((N, C), dtype=np.int64)
        self.vmap_col = np.zeros((N, C), dtype=np.int64)
        for row in range(N):
            for col in range(C):
                ci, vr, vc = self.coupled_position((0, row, col))
                self.cmap_off[row, col], self.cmap_row[row, col], self.cmap_col[row, col] = ci, vr, vc
                if self.vmap_off[vr, vc] != -1:
                    raise AssertionError("coupling map is not injective")
                self.vmap_off[vr, vc], self.vmap_row[vr, vc], self.vmap_col[vr, vc] = ci, row, col

    def virtual_chunk(self, get_chunk, i):
        """Assemble Y(i) from a callable chunk-index -> N x 2B array."""
        blank = np.zeros((self.N, self.cols), dtype=np.uint8)
        stack = np.stack([get_chunk(i - off) if off > self.guard else blank
                          for off in range(self.span + 1)])
        return stack[self.vmap_off, self.vmap_row, self.vmap_col]

    def interleave_block(self, block):
        return self.interleaver.apply(block)


def source_chunk(i, j, params=None):
    return (params or default_params()).source_chunk(i, j)


def coupled_position(addr, params=None):
    return (params or default_params()).coupled_position(addr)


def interleave_block(block, params=None):
    return (params or default_params()).interleave_block(block)


_DEFAULT = None


def default_params():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = OfecParams()
    return _DEFAULT


class OfecEncoder:
    """Streaming encoder. Chunks at negative indices are all-zero."""

    def __init__(self, params=None, start=0):
        self.params = params or default_params()
        self.next_index = start
        self._history = {}

    def _chunk(self, i):
        if i < 0:
            return np.zeros((self.params.N, self.params.cols), dtype=np.uint8)
        try:
            return self._history[i]
        except KeyError:
            raise KeyError(f"encoder buffer is missing chunk {i}") from None

    def encode_chunk(self, info, i=None):
        p = self.params
        i = self.next_index if i is None else i
        info = np.asarray(info, dtype=np.uint8)
        if info.shape != (p.K, p.cols):
            raise ValueError(f"info shape {info.shape} != {(p.K, p.cols)}")
        virt = p.virtual_chunk(self._chunk, i)
        msgs = np.concatenate([virt, info], axis=0).T
        cw = p.code.encode(msgs)
        out = np.ascontiguousarray(cw[:, p.N:].T)
        self._history[i] = out
        self._history.pop(i - p.span - 1, None)
        self.next_index = i + 1
        return out


def encode_chunk(info, encoder):
    return encoder.encode_chunk(info)
