"""Monte Carlo BER points, CSV sweeps and stall-pattern regression runs."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .channel import ChannelModel, transmit_hard
from .core import OfecEncoder, default_params
from .ibdd import DecodeSchedule, StreamDecoder, decode_stream
from .spr import SprPipelineConfig
from .stall_lab import load_corpus

VARIANTS = ("ibdd", "ibdd_rapp", "ibdd_pipeline")
CSV_COLUMNS = ["snr_db", "p", "pre_fec_ber", "post_fec_ber", "bits_simulated", "bit_errors",
               "frames", "stalls_detected", "spr_invocations", "spr1_flips", "spr2_flips",
               "spr3_flips", "rapp_flips", "wall_seconds", "seed"]
GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1


def splitmix64(x):
    """One step of the SplitMix64 output function (platform independent)."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def worker_seed(master, i):
    return splitmix64((master + i * GOLDEN) & MASK64)


def normalize_variant(name):
    v = name.replace("-", "_")
    if v not in VARIANTS:
        raise ValueError(f"unknown decoder variant {name!r}; choose from {VARIANTS}")
    return v


def spr_for(variant, pipeline=None):
    variant = normalize_variant(variant)
    if variant == "ibdd":
        return None
    if variant == "ibdd_rapp":
        return "rapp"
    return pipeline or SprPipelineConfig()


@dataclass
class SimConfig:
    channel: str = "qam16"
    snr_db: list = field(default_factory=list)
    p: list = field(default_factory=list)
    decoder: str = "ibdd"
    schedule: DecodeSchedule = field(default_factory=DecodeSchedule)
    max_bits: int = 10**9
    target_bit_errors: int = 100
    seed: int = 0
    workers: int = 1
    out: str | None = None
    pipeline: SprPipelineConfig | None = None

    def __post_init__(self):
        self.decoder = normalize_variant(self.decoder)
        self.snr_db = [float(x) for x in self.snr_db]
        self.p = [float(x) for x in self.p]
        if self.channel == "bsc":
            if not self.p:
                raise ValueError("bsc sweep needs a non-empty p list")
        elif not self.snr_db:
            raise ValueError("SNR list must be non-empty")
        if self.target_bit_errors < 1:
            raise ValueError("target_bit_errors must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.schedule.validate(default_params())

    def points(self):
        return self.p if self.channel == "bsc" else self.snr_db

    def model(self, value, seed=0):
        if self.channel == "bsc":
            return ChannelModel("bsc", p=value, rng_seed=seed)
        return ChannelModel(self.channel, snr_db=value, rng_seed=seed)

    def metadata(self):
        conv = {"qam16": "Es/N0 dB (16-QAM, unit symbol energy)", "bpsk": "Eb/N0 dB (BPSK)",
                "bsc": "crossover probability p"}[self.channel]
        s = self.schedule
        return (f"channel={self.channel}; snr_convention={conv}; decoder={self.decoder}; "
                f"window={s.window}; passes={s.passes_per_shift}; cleanup={s.cleanup_passes}; "
                f"order={s.order}; spr_span={s.spr_span}; {self._pipeline_desc()}seed={self.seed}; workers={self.workers}; "
                f"max_bits={self.max_bits}; target_errors={self.target_bit_errors}")


    def _pipeline_desc(self):
        if self.decoder != "ibdd_pipeline":
            return ""
        pc = self.pipeline or SprPipelineConfig()
        return (f"stages={'+'.join(pc.stages)}; mrbdd={int(pc.run_mrbdd_before_each)}; "
                f"bdd_after={int(pc.run_bdd_after_each)}; clear={pc.clear_mode}; "
                f"flag_horizon={pc.flag_horizon}; ")


@dataclass
class BerRecord:
    snr_db: float | None
    p: float | None
    pre_fec_ber: float
    post_fec_ber: float
    bits_simulated: int
    bit_errors: int
    frames: int
    stalls_detected: int
    spr_invocations: int
    spr1_flips: int
    spr2_flips: int
    spr3_flips: int
    rapp_flips: int
    wall_seconds: float
    seed: int
    pre_fec_errors: int = 0

    @property
    def upper_bound_only(self):
        return self.bit_errors == 0

    def row(self):
        d = asdict(self)
        return [("" if d[k] is None else d[k]) for k in CSV_COLUMNS]

    def comparable(self):
        d = asdict(self)
        d.pop("wall_seconds")
        return d


COUNTERS = ("pre_fec_errors", "bit_errors", "bits_simulated", "frames", "stalls_detected",
            "spr_invocations", "spr1_flips", "spr2_flips", "spr3_flips", "rapp_flips")


def run_worker(config, value, index):
    """One independent stream; returns additive counters."""
    seed = worker_seed(config.seed, index)
    rng = np.random.default_rng(seed)
    model = config.model(value, seed)
    params = default_params()
    enc = OfecEncoder(params)
    dec = StreamDecoder(params, DecodeSchedule(**asdict(config.schedule)),
                        spr_for(config.decoder, config.pipeline))
    err_quota = math.ceil(config.target_bit_errors / config.workers)
    bit_quota = max(config.max_bits // config.workers, 1)
    warmup = params.span
    sent, pre = {}, {}
    c = dict.fromkeys(COUNTERS, 0)
    shape = (params.N, params.cols)
    i = 0
    while c["bit_errors"] < err_quota and c["bits_simulated"] < bit_quota:
        x = enc.encode_chunk(rng.integers(0, 2, (params.K, params.cols), dtype=np.uint8))
        y = transmit_hard(x.reshape(-1), model, rng).reshape(shape)
        sent[i] = x
        pre[i] = int(np.count_nonzero(x != y))
        for j, bits in dec.push(y):
            ref = sent.pop(j)
            nerr = pre.pop(j)
            if j < warmup:
                continue
            c["bit_errors"] += int(np.count_nonzero(bits != ref))
            c["pre_fec_errors"] += nerr
            c["bits_simulated"] += bits.size
            c["frames"] += 1
        i += 1
    st = dec.stats
    c["stalls_detected"] = st.stalls_detected
    c["spr_invocations"] = st.spr_invocations
    for k in ("spr1", "spr2", "spr3", "rapp"):
        c[f"{k}_flips"] = st.flips[k]
    return c


def _worker_args(args):
    return run_worker(*args)


def merge_counters(parts):
    total = dict.fromkeys(COUNTERS, 0)
    for part in parts:
        for k in COUNTERS:
            total[k] += part[k]
    return total


def record_from_counters(config, value, c, wall):
    bits = c["bits_simulated"]
    return BerRecord(
        snr_db=None if config.channel == "bsc" else value,
        p=value if config.channel == "bsc" else None,
        pre_fec_ber=c["pre_fec_errors"] / bits if bits else 0.0,
        post_fec_ber=c["bit_errors"] / bits if bits else 0.0,
        wall_seconds=wall, seed=config.seed,
        **{k: c[k] for k in COUNTERS})


def run_point(config, value, parallel=True):
    """Pooled BER estimate at one SNR (or p) value."""
    t0 = time.perf_counter()
    jobs = [(config, value, i) for i in range(config.workers)]
    if parallel and config.workers > 1:
        with ProcessPoolExecutor(config.workers) as ex:
            parts = list(ex.map(_worker_args, jobs))
    else:
        parts = [run_worker(*j) for j in jobs]
    return record_from_counters(config, value, merge_counters(parts), time.perf_counter() - t0)


def _read_completed(path, meta):
    done = {}
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return done
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != "# " + meta:
            raise ValueError(f"{path} was written by a different configuration:\n  {first}")
        for row in csv.DictReader(fh):
            key = row["p"] if row["p"] else row["snr_db"]
            done[float(key)] = row
    return done


def read_csv(path):
    """Parse a sweep CSV back into BerRecords."""
    out = []
    with open(path, newline="") as fh:
        fh.readline()
        for row in csv.DictReader(fh):
            kw = {}
            for f in fields(BerRecord):
                if f.name not in row:
                    continue
                v = row[f.name]
                if f.name in ("snr_db", "p"):
                    kw[f.name] = float(v) if v else None
                elif f.name in ("pre_fec_ber", "post_fec_ber", "wall_seconds"):
                    kw[f.name] = float(v)
                else:
                    kw[f.name] = int(v)
            rec = BerRecord(**kw)
            rec.pre_fec_errors = round(rec.pre_fec_ber * rec.bits_simulated)
            out.append(rec)
    return out


def run_sweep(config, progress=None):
    """run_point for every SNR; rows are appended as they finish, and points
    already present in the output file are skipped (resume)."""
    meta = config.metadata()
    records = []
    done = {}
    if config.out:
        parent = os.path.dirname(os.path.abspath(config.out))
        if not os.access(parent, os.W_OK):
            raise OSError(f"output directory {parent} is not writable")
        done = _read_completed(config.out, meta)
        if not done:
            with open(config.out, "w", newline="") as fh:
                fh.write("# " + meta + "\n")
                csv.writer(fh).writerow(CSV_COLUMNS)
    for value in config.points():
        if value in done:
            continue
        rec = run_point(config, value)
        records.append(rec)
        if progress:
            progress(rec)
        if config.out:
            with open(config.out, "a", newline="") as fh:
                csv.writer(fh).writerow(rec.row())
    if config.out:
        return read_csv(config.out)
    return records


# ------------------------------------------------------------------ regression
REGRESSION_COLUMNS = ["pattern_id", "category", "decoder", "verdict", "injected", "residual"]


def run_pattern(pattern, variant, schedule=None, params=None):
    """Inject into an all-zero stream and decode; returns the residual count."""
    params = params or default_params()
    schedule = schedule or DecodeSchedule()
    _, hi = pattern.chunk_range()
    n = hi + params.span + schedule.window + 1
    rx = np.zeros((n, params.N, params.cols), dtype=np.uint8)
    for a, r, c in pattern.positions:
        rx[a, r, c] ^= 1
    res = decode_stream(iter(rx), DecodeSchedule(**asdict(schedule)),
                        spr_for(variant), params)
    return res.bit_errors


def run_regression(corpus, variants=VARIANTS, out=None, schedule=None):
    """Verdict table over pattern x decoder; corpus is a path or a pattern list."""
    patterns = load_corpus(corpus) if isinstance(corpus, (str, os.PathLike)) else list(corpus)
    variants = [normalize_variant(v) for v in variants]
    rows = []
    for pat in patterns:
        for v in variants:
            res = run_pattern(pat, v, schedule)
            rows.append({"pattern_id": pat.id, "category": pat.category, "decoder": v,
                         "verdict": "Resolves" if res == 0 else "Stalls",
                         "injected": len(pat), "residual": res})
    if out:
        with open(out, "w", newline="") as fh:
            w = csv.DictWriter(fh, REGRESSION_COLUMNS)
            w.writeheader()
            w.writerows(rows)
    return rows
