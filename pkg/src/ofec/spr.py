"""Stall-pattern removal (SPR) driven by per-codeword BDD outcome flags.

Every stored bit has a main codeword (the column of its home chunk) and a
coupled codeword (the later column that sees it in its virtual half). The
baseline rule flips a bit when both failed. The staged pipeline runs, per
stage, a miscorrection-reduction sweep, one subroutine, and a regular sweep:

* SPR1(i)  flips bits of X(i) whose column failed or was corrected and whose
  coupled codeword failed, then clears flags forward over X(i)..X(i+depth).
* SPR2(i)  same trigger on X(i), but applies the rule to the coupled
  half-chunks of X(i+guard+1)..X(i+span), then clears flags over
  X(i)..X(i+depth) and X(i+guard+1)..X(i+span+depth).
* SPR3     the baseline rule widened to corrected main codewords.
"""

from __future__ import annotations

from dataclasses import dataclass

from .galois_bch import BddTag
from .ibdd import bdd_pass, mrbdd_pass

F, C = BddTag.FAILED, BddTag.CORRECTED
STAGES = ("spr1", "spr2", "spr3", "rapp")


@dataclass
class SprPipelineConfig:
    stages: tuple = ("spr1", "spr2", "spr3")
    run_mrbdd_before_each: bool = True
    run_bdd_after_each: bool = True
    clear_mode: str = "half"
    flag_horizon: int | None = 10

    def __post_init__(self):
        self.stages = tuple(self.stages)
        if not self.stages:
            raise ValueError("pipeline needs at least one stage")
        bad = [s for s in self.stages if s not in STAGES]
        if bad:
            raise ValueError(f"unknown SPR stages {bad}")
        if self.flag_horizon is not None and self.flag_horizon < 0:
            raise ValueError("flag_horizon must be non-negative")
        if self.clear_mode not in ("half", "full"):
            raise ValueError(f"clear_mode must be 'half' or 'full', got {self.clear_mode!r}")


def spr_rapp(buffer, lo=None, hi=None):
    """Flip every bit in chunks lo..hi whose two codewords both failed."""
    return buffer.flip_by_flags((F,), (F,), lo, hi)[0]


def spr3(buffer, lo=None, hi=None, flag_hi=None):
    """Flip bits whose main codeword failed or corrected and coupled codeword failed."""
    return buffer.flip_by_flags((F, C), (F,), lo, hi, flag_hi=flag_hi)[0]


def _triggered(buffer, i):
    row = buffer.flag_row(i)
    return bool(((row == F) | (row == C)).any())


def _clear(buffer, lo, hi, halves, mode):
    if mode == "full":
        buffer.clear_flags(lo, hi)
        return
    for h in sorted(halves):
        buffer.clear_flags(lo, hi, half=h)


def spr1(buffer, i, clear_mode="half", flag_hi=None):
    """Returns (flips, triggered). Coupled flags beyond flag_hi count as neutral."""
    if not _triggered(buffer, i):
        return 0, False
    n, cols = buffer.flip_by_flags((F, C), (F,), i, i, flag_hi=flag_hi)
    B = buffer.params.B
    if n:
        halves = {h for h in (0, 1) if cols[0, h * B:(h + 1) * B].any()}
        _clear(buffer, i, i + buffer.params.depth, halves, clear_mode)
    return n, True


def spr2(buffer, i, clear_mode="half", flag_hi=None):
    """Returns (flips, triggered). Coupled flags beyond flag_hi count as neutral."""
    if not _triggered(buffer, i):
        return 0, False
    p = buffer.params
    B = p.B
    row = buffer.flag_row(i)
    hot = {h for h in (0, 1) if ((row[h * B:(h + 1) * B] == F) | (row[h * B:(h + 1) * B] == C)).any()}
    total = 0
    flipped_halves = set()
    for j in range(i + p.guard + 1, min(i + p.span, buffer.hi) + 1):
        for h in hot:
            n, _ = buffer.flip_by_flags((F, C), (F,), j, j, half=1 - h, flag_hi=flag_hi)
            if n:
                total += n
                flipped_halves.add(1 - h)
    if total:
        _clear(buffer, i, i + p.depth, {1 - h for h in flipped_halves}, clear_mode)
        _clear(buffer, i + p.guard + 1, i + p.span + p.depth, flipped_halves, clear_mode)
    return total, True


def _sweep(buffer, lo, hi, order, top_only):
    fn = mrbdd_pass if top_only else bdd_pass
    if order == "alternating":
        return fn(buffer, lo, hi, half=0) + fn(buffer, lo, hi, half=1)
    return fn(buffer, lo, hi)


def run_pipeline(buffer, config=None, region=None, decode_range=None, order="sequential"):
    """Run the staged SPR pipeline.

    region: chunks scanned by SPR1/SPR2 and swept by SPR3/Rapp.
    decode_range: chunks whose codewords the surrounding (MR)BDD sweeps decode.
    Returns {stage: {"flips", "triggered"}}.
    """
    config = config or SprPipelineConfig()
    lo, hi = region or (buffer.frozen_below, buffer.hi)
    d_lo, d_hi = decode_range or (buffer.frozen_below, buffer.hi)
    flag_hi = None
    if config.flag_horizon is not None:
        flag_hi = min(hi + config.flag_horizon, buffer.hi)
    stats = {}
    for stage in config.stages:
        if config.run_mrbdd_before_each:
            _sweep(buffer, d_lo, d_hi, order, top_only=True)
        flips = triggered = 0
        if stage in ("spr1", "spr2"):
            fn = spr1 if stage == "spr1" else spr2
            for i in range(lo, hi + 1):
                n, hit = fn(buffer, i, config.clear_mode, flag_hi)
                flips += n
                triggered += hit
        elif stage == "spr3":
            flips = spr3(buffer, lo, hi, flag_hi)
        else:
            flips = spr_rapp(buffer, lo, hi)
        if config.run_bdd_after_each:
            _sweep(buffer, d_lo, d_hi, order, top_only=False)
        st = stats.setdefault(stage, {"flips": 0, "triggered": 0})
        st["flips"] += flips
        st["triggered"] += triggered
    return stats


def invoke_spr(buffer, spr, r_lo, r_hi, d_lo, d_hi, order="sequential"):
    """Apply the configured SPR variant; returns flip counts keyed by stage."""
    if spr == "rapp":
        return {"rapp": spr_rapp(buffer, r_lo, r_hi)}
    if isinstance(spr, SprPipelineConfig):
        stats = run_pipeline(buffer, spr, (r_lo, r_hi), (d_lo, d_hi), order)
        return {k: v["flips"] for k, v in stats.items()}
    raise ValueError(f"unknown SPR variant {spr!r}")
