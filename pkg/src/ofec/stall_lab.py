"""Construction and verification of stall patterns.

Because the code is linear, every pattern is an error vector injected into
the all-zero stream. OFEC patterns address transmitted bits as
(chunk, row, col); product-code patterns use (row, col).

Category 1: every touched codeword carries t+1 errors, so BDD fails on all of
them and iBDD never moves.
Category 2: one codeword M carries d_min - t errors and miscorrects; the bits
it wrongly flips are fixed again by their lightly loaded coupled codewords,
after which M miscorrects again (a period-2 loop under half-alternating
sweeps).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
import numpy as np

from .core import ChunkAddress, default_params
from .galois_bch import BddTag, EbchCode
from .ibdd import ChunkBuffer, bdd_pass

HOME_CHUNK = 20  # canonical chunk of the pattern's half-0 codewords


@dataclass
class ErrorPattern:
    positions: list
    category: int
    seed: int | None = None
    metadata: dict = field(default_factory=dict)
    id: str = ""

    def __post_init__(self):
        self.positions = [ChunkAddress(*map(int, p)) if len(p) == 3 else tuple(map(int, p))
                          for p in self.positions]
        if len(set(self.positions)) != len(self.positions):
            raise ValueError("pattern positions must be distinct")
        if self.category not in (1, 2):
            raise ValueError(f"category must be 1 or 2, got {self.category}")

    def __len__(self):
        return len(self.positions)

    def shifted(self, delta):
        return ErrorPattern([(a + delta, r, c) for a, r, c in self.positions], self.category,
                            self.seed, dict(self.metadata), self.id)

    def chunk_range(self):
        ch = [p[0] for p in self.positions]
        return (min(ch), max(ch)) if ch else (HOME_CHUNK, HOME_CHUNK)

    def to_record(self):
        return {"id": self.id, "category": self.category, "seed": self.seed,
                "metadata": self.metadata,
                "positions": [{"chunk": a, "row": r, "col": c} for a, r, c in self.positions]}

    @classmethod
    def from_record(cls, rec):
        try:
            pos = [(p["chunk"], p["row"], p["col"]) for p in rec["positions"]]
            return cls(pos, int(rec["category"]), rec.get("seed"), rec.get("metadata", {}),
                       rec.get("id", ""))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed pattern record: {exc}") from exc


def save_corpus(patterns, path):
    """JSON Lines, one pattern record per line."""
    with open(path, "w") as fh:
        for p in patterns:
            fh.write(json.dumps(p.to_record(), sort_keys=True) + "\n")


def load_corpus(path):
    out = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{n}: {exc}") from exc
            out.append(ErrorPattern.from_record(rec))
    return out


# --------------------------------------------------------------------- OFEC
def crossing(params, i, col, k, rho):
    """Bit shared by column `col` of X(i) and the codeword (i+k, rho) of the
    opposite half (rho counted within that half)."""
    j = params.span - k
    if not params.guard < k <= params.span:
        raise ValueError(f"offset {k} outside coupling range")
    addr = ChunkAddress(i, j * params.B + rho, col)
    got = params.coupled_position(addr)
    want = params.B + rho if col < params.B else rho
    if got.chunk != i + k or got.col != want:
        raise AssertionError("interleaver is not the transpose; crossing() needs it")
    return addr


def codeword_errors(params, positions):
    """Error count of every component codeword touched by positions.

    Keys are (chunk, col) of the codeword's transmitted half.
    """
    cnt = {}
    for a, r, c in positions:
        cp = params.coupled_position((a, r, c))
        for key in ((a, c), (cp.chunk, cp.col)):
            cnt[key] = cnt.get(key, 0) + 1
    return cnt


def gen_cat1(params=None, variant="minimal", seed=None, chunk=HOME_CHUNK, t=2, half=0):
    """Cat-1 grid: t+1 (or t+2, enlarged) columns of one half of X(chunk)
    against as many coupled codewords in the other half of later chunks."""
    p = params or default_params()
    size = t + 1 if variant == "minimal" else t + 2
    if variant not in ("minimal", "enlarged"):
        raise ValueError(f"unknown variant {variant!r}")
    pairs = [(k, rho) for k in range(p.guard + 1, p.span + 1) for rho in range(p.B)]
    if size > p.B or size > len(pairs):
        raise ValueError("geometry too small for the requested grid")
    if seed is None:
        cols = list(range(0, 2 * size, 2))
        cw = [(p.guard + 1 + n, (3 * n + 1) % p.B) for n in range(size)]
    else:
        rng = np.random.default_rng(seed)
        cols = sorted(rng.choice(p.B, size, replace=False).tolist())
        cw = [pairs[n] for n in sorted(rng.choice(len(pairs), size, replace=False))]
    pos = []
    for a, c in enumerate(cols):
        for b, (k, rho) in enumerate(cw):
            if variant == "enlarged" and a == b:
                continue  # empty crossing
            pos.append(crossing(p, chunk, c + half * p.B, k, rho))
    meta = {"variant": variant, "half": half, "columns": cols, "coupled": [list(x) for x in cw], "chunk": chunk}
    return ErrorPattern(pos, 1, seed, meta, f"cat1-{variant}-{seed}")


@dataclass
class StallVerdict:
    stalls: bool
    passes: int
    residual: int
    period: int | None = None

    def __str__(self):
        if self.stalls:
            return f"Stalls(period={self.period}, residual={self.residual})"
        return f"Resolves({self.passes})"


def pattern_buffer(pattern, params=None):
    """Zero buffer holding every chunk the pattern's codewords reference, with
    the pattern injected. Returns (buffer, lo, hi) of the decodable range."""
    p = params or default_params()
    a, b = pattern.chunk_range()
    lo = max(a - p.span, 0)
    hi = b + p.span
    buf = ChunkBuffer(p, capacity=hi - lo + 2 * p.span + 2, start=lo)
    zero = np.zeros((p.N, p.cols), dtype=np.uint8)
    for _ in range(lo, hi + 1):
        buf.push(zero)
    buf.inject(pattern.positions)
    return buf, lo, hi


def _pass(buf, lo, hi, order):
    if order == "alternating":
        return [bdd_pass(buf, lo, hi, half=0), bdd_pass(buf, lo, hi, half=1)]
    return [bdd_pass(buf, lo, hi)]


def trace_passes(pattern, params=None, passes=10, order="alternating"):
    """States (bit copies) and flag copies after each pass; 'alternating'
    yields one entry per half-pass."""
    buf, lo, hi = pattern_buffer(pattern, params)
    states, flags = [buf.state(lo, hi)], []
    for _ in range(passes):
        if order == "alternating":
            for h in (0, 1):
                bdd_pass(buf, lo, hi, half=h)
                states.append(buf.state(lo, hi))
                flags.append(np.stack([buf.flag_row(i).copy() for i in range(lo, hi + 1)]))
        else:
            bdd_pass(buf, lo, hi)
            states.append(buf.state(lo, hi))
            flags.append(np.stack([buf.flag_row(i).copy() for i in range(lo, hi + 1)]))
    return states, flags, lo


def verify_stall(pattern, params=None, max_passes=20, order="sequential"):
    """Run plain iBDD on the injected pattern with loop detection."""
    buf, lo, hi = pattern_buffer(pattern, params)
    if buf.error_count(lo, hi) == 0:
        return StallVerdict(False, 0, 0)
    history = [buf.state(lo, hi)]
    for n in range(1, max_passes + 1):
        _pass(buf, lo, hi, order)
        st = buf.state(lo, hi)
        if not st.any():
            return StallVerdict(False, n, 0)
        for period in (1, 2):
            if len(history) >= period and np.array_equal(st, history[-period]):
                return StallVerdict(True, n, int(st.sum()), period)
        history = (history + [st])[-2:]
    return StallVerdict(True, max_passes, int(buf.error_count(lo, hi)), None)


def _bdd_on_counts(code, params, buf, key):
    i, c = key
    return code.bdd_decode(buf.codeword(i, c))


def gen_cat2(params=None, seed=0, budget=2000, chunk=HOME_CHUNK, verify=True, shape="random",
             m_errors=None):
    """Search for a verified miscorrection loop (Category 2).

    Layout: a codeword M (half-0 column of X(chunk)) carries d_min - t or more
    errors at its crossings with half-1 codewords C1, C2, ... Support codewords G (more
    half-0 columns) give every C exactly two more errors; extra half-1 codewords
    E with three G-crossings top up any G below t+1. M must miscorrect onto bits
    whose coupled codewords are otherwise error-free, so they are corrected
    back and the loop repeats.

    shape="regular" fixes the regular layout where M carries 2t+2 errors, there
    are 2t support codewords with exactly t+1 errors each and no extras; a
    flip-on-double-failure step then leaves every C with t+1 errors again.
    m_errors pins the error count of M (default: random in d_min-t .. 2t+2).
    """
    if shape not in ("random", "regular"):
        raise ValueError(f"unknown shape {shape!r}")
    p = params or default_params()
    code = p.code
    t, w = code.t, code.d_min - code.t
    rng = np.random.default_rng(seed)
    pairs = [(k, rho) for k in range(p.guard + 1, p.span + 1) for rho in range(p.B)]
    for attempt in range(budget):
        if shape == "regular":
            m_err, g, e = 2 * t + 2, 2 * t, 0
        else:
            m_err = m_errors or int(rng.integers(w, 2 * t + 3))
            g = int(rng.integers(2, 7))
            e = int(rng.integers(0, 3)) if g > t else 0
        cols = rng.choice(p.B, 1 + g, replace=False).tolist()
        m_col, g_cols = cols[0], cols[1:]
        cw = [pairs[n] for n in rng.choice(len(pairs), m_err + e, replace=False)]
        c_cw, e_cw = cw[:m_err], cw[m_err:]
        edges = {(m_col, x) for x in c_cw}
        deg = {c: 0 for c in g_cols}
        if shape == "regular":
            stubs = rng.permutation(np.repeat(g_cols, t + 1)).reshape(m_err, t)
            if any(len(set(row)) < t for row in stubs.tolist()):
                continue
            picks = stubs.tolist()
        else:
            picks = [rng.choice(g_cols, t, replace=False).tolist() for _ in c_cw]
        for x, chosen in zip(c_cw, picks):
            for c in chosen:
                edges.add((c, x))
                deg[c] += 1
        for x in e_cw:
            for c in rng.choice(g_cols, min(g, t + 1), replace=False).tolist():
                edges.add((c, x))
                deg[c] += 1
        if min(deg.values()) < t + 1:
            continue
        pos = sorted(crossing(p, chunk, c, k, rho) for c, (k, rho) in edges)
        pattern = ErrorPattern(pos, 2, seed, {}, f"cat2-{seed}-{attempt}")
        info = check_cat2(pattern, p, (chunk, m_col), verify)
        if info is None:
            continue
        pattern.metadata = {"shape": shape, "chunk": chunk, "miscorrecting": [chunk, m_col],
                            "support": g_cols, "checks": [list(x) for x in c_cw],
                            "extra": [list(x) for x in e_cw], "attempt": attempt, **info}
        return pattern
    raise RuntimeError(f"no verified Category 2 loop within budget={budget} (seed={seed})")


def check_cat2(pattern, params, m_key, verify=True):
    """Structural and dynamic checks; returns metadata or None."""
    p = params
    code = p.code
    t = code.t
    buf, lo, hi = pattern_buffer(pattern, p)
    counts = codeword_errors(p, pattern.positions)
    if counts.get(m_key, 0) < code.d_min - t:
        return None
    # every other touched codeword must fail outright
    for key, n in counts.items():
        if key == m_key:
            continue
        if n <= t or _bdd_on_counts(code, p, buf, key).tag != BddTag.FAILED:
            return None
    out = _bdd_on_counts(code, p, buf, m_key)
    if out.tag != BddTag.CORRECTED:
        return None
    # re-encode check: the decoded word is a codeword other than zero
    word = buf.codeword(*m_key)
    word[list(out.flipped_positions)] ^= 1
    if not code.is_codeword(word) or not word.any():
        return None
    i, c = m_key
    targets = []
    for q in out.flipped_positions:
        if q < p.N:
            return None  # keep the loop inside the transmitted half of X(i)
        home = ChunkAddress(i, q - p.N, c)
        cp = p.coupled_position(home)
        other = (home.chunk, home.col) if (cp.chunk, cp.col) == m_key else (cp.chunk, cp.col)
        if counts.get(other, 0) != 0:
            return None
        targets.append(list(home))
    info = {"miscorrection": targets}
    if verify:
        states, _, _ = trace_passes(pattern, p, passes=3, order="alternating")
        # half-passes: state k == state k-2, and consecutive states differ
        if not (np.array_equal(states[-1], states[-3])
                and not np.array_equal(states[-1], states[-2])):
            return None
        v = verify_stall(pattern, p, max_passes=10, order="sequential")
        if not v.stalls:
            return None
        info["period_alternating"] = 2
    return info


def loop_period(pattern, params=None, passes=4, order="alternating"):
    """Smallest period (1 or 2) of the trailing state sequence, or None."""
    states, _, _ = trace_passes(pattern, params, passes, order)
    if np.array_equal(states[-1], states[-2]):
        return 1
    if np.array_equal(states[-1], states[-3]):
        return 2
    return None


def gen_cat2_corpus(count, params=None, seed=0, budget=2000, shape="random"):
    """`count` verified patterns from consecutive seeds."""
    return [gen_cat2(params, seed=s, budget=budget, shape=shape)
            for s in range(seed, seed + count)]


# ------------------------------------------------------------ product code
class ProductCodeModel:
    """n x n product code with the same eBCH component on rows and columns.

    iBDD alternates row and column half-iterations; `rapp` flips every bit
    whose row and column both failed in the latest half-iterations.
    """

    def __init__(self, code=None):
        self.code = code or EbchCode(5)
        self.n = self.code.n
        self.errors = np.zeros((self.n, self.n), dtype=np.uint8)
        self.row_tags = np.zeros(self.n, dtype=np.int8)
        self.col_tags = np.zeros(self.n, dtype=np.int8)

    def encode(self, info):
        """k x k information block -> n x n array whose rows and columns are codewords."""
        rows = self.code.encode(np.asarray(info, dtype=np.uint8))
        return np.ascontiguousarray(self.code.encode(rows.T).T)

    def inject(self, positions):
        for r, c in positions:
            self.errors[r, c] ^= 1

    def _half(self, axis):
        arr = self.errors if axis == 0 else self.errors.T
        tags = self.row_tags if axis == 0 else self.col_tags
        flips = 0
        for k in range(self.n):
            out = self.code.bdd_decode(arr[k])
            tags[k] = out.tag
            for q in out.flipped_positions:
                arr[k, q] ^= 1
                flips += 1
        return flips

    def iterate(self, n=1):
        flips = 0
        for _ in range(n):
            flips += self._half(0) + self._half(1)
        return flips

    def rapp(self):
        mask = np.outer(self.row_tags == BddTag.FAILED, self.col_tags == BddTag.FAILED)
        self.errors ^= mask.astype(np.uint8)
        return int(mask.sum())

    def residual(self):
        return int(self.errors.sum())


GRID_ROWS = (1, 4, 7, 13)
GRID_COLS = (1, 4, 9, 12)


def pc_cat1(rows=GRID_ROWS[:3], cols=GRID_COLS[:3], skip=()):
    """Errors at every row/column crossing except those listed in skip."""
    return [(r, c) for r in rows for c in cols if (r, c) not in set(skip)]


def pc_enlarged_grid():
    """Enlarged Cat-1 grid: 4 rows x 4 columns with a permutation of crossings empty."""
    return pc_cat1(GRID_ROWS, GRID_COLS, skip=list(zip(GRID_ROWS, GRID_COLS)))


def pc_search_cat2(code=None, seed=0, budget=5000):
    """Random search for a product-code pattern with a miscorrecting row.

    Row M holds d_min - t errors; each of its columns gets t more errors from
    support rows, and any extra column used by the supports gets t+1. Accepted
    once a row half-iteration changes only row M and the following column
    half-iteration restores the injected pattern. Returns (positions, row).
    """
    code = code or EbchCode(5)
    n, t, w = code.n, code.t, code.d_min - code.t
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        g = int(rng.integers(t + 1, t + 5))
        extra = int(rng.integers(0, 3))
        rows = rng.choice(n, 1 + g, replace=False).tolist()
        m_row, support = rows[0], rows[1:]
        cols = rng.choice(n, w + extra, replace=False).tolist()
        pos = {(m_row, c) for c in cols[:w]}
        for c in cols[:w]:
            pos |= {(r, c) for r in rng.choice(support, t, replace=False).tolist()}
        for c in cols[w:]:
            pos |= {(r, c) for r in rng.choice(support, min(g, t + 1), replace=False).tolist()}
        if min(sum(1 for r, _ in pos if r == s) for s in support) < t + 1:
            continue
        pc = ProductCodeModel(code)
        pc.inject(sorted(pos))
        before = pc.errors.copy()
        pc._half(0)
        changed = np.flatnonzero((pc.errors != before).any(axis=1)).tolist()
        pc._half(1)
        if changed == [m_row] and np.array_equal(pc.errors, before):
            return sorted(pos), m_row
    raise RuntimeError(f"no product-code miscorrection loop within budget={budget}")
