"""Windowed iterative bounded-distance decoding of the OFEC stream.

Every transmitted bit is stored once, in its home chunk. The coupled
("virtual") copy seen by the later codeword is a view of the same cell, so a
flip is always visible to both codewords the bit belongs to.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .core import default_params
from .galois_bch import BddTag


class ChunkBuffer:
    """Ring of chunk slots with per-codeword syndromes and outcome flags.

    Chunks ``start - span .. start - 1`` are pre-filled with zeros (the
    genesis history). Chunks below ``frozen_below`` are read-only: flips that
    would land there are dropped and their codewords are never decoded.
    """

    def __init__(self, params=None, capacity=None, start=0):
        p = self.params = params or default_params()
        self.capacity = capacity or 4 * p.span
        if self.capacity <= p.span:
            raise ValueError("capacity must exceed the coupling span")
        M, N, C = self.capacity, p.N, p.cols
        self.bits = np.zeros((M, N, C), dtype=np.uint8)
        self.syn = np.zeros((M, C), dtype=np.int64)
        self.flags = np.zeros((M, C), dtype=np.int8)
        self.lo = start - p.span
        self.hi = start - 1
        self.frozen_below = start
        tags, pos0, pos1 = p.code.decode_table()
        self._tables = (p.code.syndrome_columns, tags, pos0, pos1)

    # ------------------------------------------------------------- bookkeeping
    def __contains__(self, i):
        return self.lo <= i <= self.hi

    def slot(self, i):
        if i not in self:
            raise IndexError(f"chunk {i} not held (buffer spans {self.lo}..{self.hi})")
        return i % self.capacity

    def chunk(self, i):
        """Writable view of chunk i; prefer flip() to keep syndromes current."""
        return self.bits[self.slot(i)]

    def flag_row(self, i):
        return self.flags[self.slot(i)]

    def flag(self, i, c):
        if i > self.hi or i < self.frozen_below:
            return BddTag.ALREADY_CODEWORD
        return BddTag(int(self.flags[i % self.capacity, c]))

    def push(self, chunk):
        """Append the next chunk of hard bits; returns its index."""
        p = self.params
        chunk = np.asarray(chunk, dtype=np.uint8)
        if chunk.shape != (p.N, p.cols):
            raise ValueError(f"chunk shape {chunk.shape} != {(p.N, p.cols)}")
        i = self.hi + 1
        if i - self.lo + 1 > self.capacity:
            if self.lo >= self.frozen_below - p.span:
                raise RuntimeError(f"buffer full: chunk {self.lo} is still needed")
            self.lo += 1
        s = i % self.capacity
        self.bits[s] = chunk
        self.flags[s] = BddTag.ALREADY_CODEWORD
        self.hi = i
        self.syn[s] = self._codeword_syndromes(i)
        return i

    def freeze(self, below):
        self.frozen_below = below

    def _codeword_syndromes(self, i):
        H = self.params.code.syndrome_columns
        cw = self.codewords(i)
        return np.bitwise_xor.reduce(np.where(cw, H[None, :], 0), axis=1)

    def codewords(self, i):
        """All 2B component codewords of chunk i as a (2B, n) array."""
        p = self.params

        def get(j):
            if j in self:
                return self.bits[j % self.capacity]
            if j < self.lo and j < 0:
                return np.zeros((p.N, p.cols), dtype=np.uint8)
            raise IndexError(f"chunk {j} not held")

        virt = p.virtual_chunk(get, i)
        return np.concatenate([virt, self.bits[self.slot(i)]], axis=0).T.copy()

    def codeword(self, i, c):
        return self.codewords(i)[c]

    def recompute_syndromes(self):
        for i in range(max(self.lo + self.params.span, self.frozen_below), self.hi + 1):
            self.syn[i % self.capacity] = self._codeword_syndromes(i)

    def flip(self, i, row, col):
        """Toggle one stored bit, updating both codewords that contain it."""
        p = self.params
        H = self.params.code.syndrome_columns
        self.slot(i)
        K.flip_bit(self.bits, self.syn, self.capacity, p.N, H, p.cmap_off, p.cmap_row,
                   p.cmap_col, self.hi, i, row, col)

    def inject(self, positions):
        for i, r, c in positions:
            self.flip(i, r, c)

    def state(self, lo=None, hi=None):
        """Copy of the stored bits for chunks lo..hi (defaults: writable range)."""
        lo = self.frozen_below if lo is None else lo
        hi = self.hi if hi is None else hi
        return np.stack([self.bits[self.slot(i)] for i in range(lo, hi + 1)])

    def error_count(self, lo=None, hi=None):
        """Number of ones in chunks lo..hi (errors when the truth is all-zero)."""
        return int(self.state(lo, hi).sum(dtype=np.int64))

    def error_positions(self, lo=None, hi=None):
        lo = self.frozen_below if lo is None else lo
        st = self.state(lo, hi)
        return [(lo + int(a), int(b), int(c)) for a, b, c in zip(*np.nonzero(st))]

    # ---------------------------------------------------------------- kernels
    def _resolve(self, lo, hi):
        lo = self.frozen_below if lo is None else lo
        hi = self.hi if hi is None else hi
        if lo < self.frozen_below or hi > self.hi:
            raise IndexError(f"range {lo}..{hi} exceeds decodable window "
                             f"{self.frozen_below}..{self.hi}")
        return lo, hi

    def sweep(self, lo=None, hi=None, half=None, top_only=False):
        lo, hi = self._resolve(lo, hi)
        p = self.params
        H, tags, pos0, pos1 = self._tables
        return K.bdd_sweep(self.bits, self.syn, self.flags, self.capacity, p.N, p.B, H, tags,
                           pos0, pos1, p.cmap_off, p.cmap_row, p.cmap_col, p.vmap_off,
                           p.vmap_row, p.vmap_col, lo, hi, -1 if half is None else half,
                           top_only, self.frozen_below, self.hi)

    def flip_by_flags(self, main_tags, virt_tags, lo=None, hi=None, half=None, flag_hi=None):
        """Flip bits whose main tag is in main_tags and coupled tag in virt_tags.

        Returns (flip count, per-column flip indicator of shape (hi-lo+1, 2B)).
        """
        lo, hi = self._resolve(lo, hi)
        p = self.params
        main_mask = sum(1 << int(t) for t in main_tags)
        virt_mask = sum(1 << int(t) for t in virt_tags)
        cols = np.zeros((hi - lo + 1, p.cols), dtype=np.uint8)
        n = K.flag_rule_flip(self.bits, self.syn, self.flags, self.capacity, p.N, p.B,
                             p.code.syndrome_columns, p.cmap_off, p.cmap_row, p.cmap_col,
                             lo, hi, -1 if half is None else half, main_mask, virt_mask,
                             self.hi if flag_hi is None else flag_hi, self.hi, cols)
        return n, cols

    def clear_flags(self, lo, hi, half=None):
        B = self.params.B
        cs = slice(None) if half is None else slice(half * B, half * B + B)
        for i in range(max(lo, self.frozen_below), min(hi, self.hi) + 1):
            self.flags[i % self.capacity, cs] = BddTag.ALREADY_CODEWORD


def bdd_pass(buffer, lo=None, hi=None, half=None):
    """Full BDD sweep; flips land wherever the bit is stored. Returns flip count."""
    return buffer.sweep(lo, hi, half, top_only=False)


def mrbdd_pass(buffer, lo=None, hi=None, half=None):
    """Miscorrection-reduction sweep: only transmitted-half flips are applied."""
    return buffer.sweep(lo, hi, half, top_only=True)


def run_passes(buffer, n, lo=None, hi=None, order="sequential"):
    flips = 0
    for _ in range(n):
        if order == "sequential":
            flips += bdd_pass(buffer, lo, hi)
        elif order == "alternating":
            flips += bdd_pass(buffer, lo, hi, half=0)
            flips += bdd_pass(buffer, lo, hi, half=1)
        else:
            raise ValueError(f"unknown sweep order {order!r}")
    return flips


@dataclass
class DecodeSchedule:
    window: int = 24
    passes_per_shift: int = 2
    cleanup_passes: int = 2
    order: str = "sequential"
    spr_span: int = 1

    def validate(self, params):
        need = 2 * params.depth + params.guard + 1
        if self.window < need:
            raise ValueError(f"window {self.window} < 2*depth+guard+1 = {need}")
        if self.passes_per_shift < 1 or self.cleanup_passes < 0:
            raise ValueError("pass counts must be positive")
        if not 1 <= self.spr_span <= self.window:
            raise ValueError("spr_span outside [1, window]")
        if self.order not in ("sequential", "alternating"):
            raise ValueError(f"unknown sweep order {self.order!r}")


@dataclass
class StreamStats:
    frames: int = 0
    stalls_detected: int = 0
    spr_invocations: int = 0
    flips: dict = field(default_factory=lambda: {"spr1": 0, "spr2": 0, "spr3": 0, "rapp": 0})


class StreamDecoder:
    """Sliding-window iBDD decoder with optional stall-pattern removal.

    ``spr`` is None, the string ``"rapp"`` or an SprPipelineConfig.
    """

    def __init__(self, params=None, schedule=None, spr=None):
        self.params = params or default_params()
        self.schedule = schedule or DecodeSchedule()
        self.schedule.validate(self.params)
        self.spr = spr
        self.buffer = ChunkBuffer(self.params, self.schedule.window + self.params.span, start=0)
        self.oldest = 0
        self.stats = StreamStats()

    def _passes(self, n):
        run_passes(self.buffer, n, self.oldest, self.buffer.hi, self.schedule.order)

    def push(self, chunk):
        """Feed one received chunk; returns a list of (index, decided bits)."""
        self.buffer.push(chunk)
        self._passes(self.schedule.passes_per_shift)
        if self.buffer.hi - self.oldest + 1 >= self.schedule.window:
            return [self._emit()]
        return []

    def finish(self):
        out = []
        while self.oldest <= self.buffer.hi:
            self._passes(self.schedule.passes_per_shift)
            out.append(self._emit())
        return out

    def _emit(self):
        from .spr import invoke_spr

        buf, sched = self.buffer, self.schedule
        a = self.oldest
        r_hi = min(a + sched.spr_span - 1, buf.hi)
        region_flags = buf.flags[[i % buf.capacity for i in range(a, r_hi + 1)]]
        if (region_flags == BddTag.FAILED).any():
            self.stats.stalls_detected += 1
            if self.spr is not None:
                self.stats.spr_invocations += 1
                counts = invoke_spr(buf, self.spr, a, r_hi, a, buf.hi, sched.order)
                for k, v in counts.items():
                    self.stats.flips[k] += v
                self._passes(sched.cleanup_passes)
        bits = buf.chunk(a).copy()
        self.oldest = a + 1
        buf.freeze(self.oldest)
        self.stats.frames += 1
        return a, bits


@dataclass
class StreamResult:
    chunks: list
    bit_errors: int
    bits: int
    stats: StreamStats


def decode_stream(source, schedule=None, spr=None, params=None, truth=None):
    """Decode an iterable of received chunks.

    ``truth`` maps chunk index -> transmitted chunk (or is None for the
    all-zero stream). Residual errors are counted over every emitted chunk.
    """
    dec = StreamDecoder(params, schedule, spr)
    emitted = []
    for rx in source:
        emitted.extend(dec.push(rx))
    emitted.extend(dec.finish())
    errors = 0
    for i, bits in emitted:
        ref = 0 if truth is None else truth[i]
        errors += int(np.count_nonzero(bits != ref))
    n_bits = sum(b.size for _, b in emitted)
    return StreamResult(emitted, errors, n_bits, dec.stats)
