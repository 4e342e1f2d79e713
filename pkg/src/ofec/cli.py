"""Command-line entry point: simulate, regress, genpattern."""

from __future__ import annotations

import argparse
import sys

from .ibdd import DecodeSchedule
from .sim import REGRESSION_COLUMNS, SimConfig, run_regression, run_sweep
from .spr import SprPipelineConfig
from .stall_lab import gen_cat1, gen_cat2, save_corpus


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def build_parser():
    ap = argparse.ArgumentParser(prog="ofec", description="OFEC hard-decision decoding lab")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo BER sweep to CSV")
    sim.add_argument("--channel", choices=("qam16", "bpsk", "bsc"), default="qam16")
    pts = sim.add_mutually_exclusive_group(required=True)
    pts.add_argument("--snr-db", type=_floats, help="comma/space separated SNR list in dB")
    pts.add_argument("--p", type=_floats, help="comma/space separated BSC crossover list")
    sim.add_argument("--decoder", choices=("ibdd", "ibdd-rapp", "ibdd-pipeline"), default="ibdd")
    sim.add_argument("--window", type=int, default=24)
    sim.add_argument("--passes", type=int, default=2, help="BDD sweeps per window shift")
    sim.add_argument("--cleanup", type=int, default=2, help="BDD sweeps after SPR")
    sim.add_argument("--order", choices=("sequential", "alternating"), default="sequential")
    sim.add_argument("--stages", default="spr1,spr2,spr3",
                     help="pipeline stage list (ibdd-pipeline only)")
    sim.add_argument("--flag-horizon", type=int, default=10,
                     help="chunks past the SPR region whose flags are used; -1 for all")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--max-bits", type=float, default=1e9)
    sim.add_argument("--target-errors", type=int, default=100)
    sim.add_argument("--out", required=True)

    reg = sub.add_parser("regress", help="replay a stall-pattern corpus")
    reg.add_argument("--corpus", required=True)
    reg.add_argument("--decoders", default="ibdd,ibdd-rapp,ibdd-pipeline")
    reg.add_argument("--out", required=True)

    gen = sub.add_parser("genpattern", help="write stall patterns as JSON Lines")
    gen.add_argument("--category", type=int, choices=(1, 2), required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--variant", default=None,
                     help="category 1: minimal|enlarged; category 2: random|regular")
    gen.add_argument("--budget", type=int, default=3000)
    gen.add_argument("--out", required=True)
    return ap


def cmd_simulate(args):
    stages = tuple(s for s in args.stages.split(",") if s)
    cfg = SimConfig(
        channel=args.channel, snr_db=args.snr_db or [], p=args.p or [],
        decoder=args.decoder,
        schedule=DecodeSchedule(args.window, args.passes, args.cleanup, args.order),
        max_bits=int(args.max_bits), target_bit_errors=args.target_errors, seed=args.seed,
        workers=args.workers, out=args.out,
        pipeline=SprPipelineConfig(stages=stages,
                                   flag_horizon=None if args.flag_horizon < 0 else args.flag_horizon))

    def show(rec):
        x = rec.p if rec.snr_db is None else rec.snr_db
        print(f"{x:g}\tpre={rec.pre_fec_ber:.3e}\tpost={rec.post_fec_ber:.3e}\t"
              f"errors={rec.bit_errors}\tbits={rec.bits_simulated}\t{rec.wall_seconds:.1f}s",
              flush=True)

    run_sweep(cfg, progress=show)
    return 0


def cmd_regress(args):
    rows = run_regression(args.corpus, args.decoders.split(","), args.out)
    print("\t".join(REGRESSION_COLUMNS))
    for r in rows:
        print("\t".join(str(r[k]) for k in REGRESSION_COLUMNS))
    return 0


def cmd_genpattern(args):
    pats = []
    for s in range(args.seed, args.seed + args.count):
        if args.category == 1:
            pats.append(gen_cat1(variant=args.variant or "minimal", seed=s))
        else:
            pats.append(gen_cat2(seed=s, budget=args.budget, shape=args.variant or "random"))
    save_corpus(pats, args.out)
    print(f"wrote {len(pats)} pattern(s) to {args.out}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"simulate": cmd_simulate, "regress": cmd_regress, "genpattern": cmd_genpattern}
    try:
        return handler[args.command](args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"ofec {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
