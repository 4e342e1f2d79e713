"""Walk through the two stall categories and what each decoder does with them.

    python demos/stall_walkthrough.py
"""

from ofec.core import default_params
from ofec.sim import run_pattern
from ofec.stall_lab import (ProductCodeModel, codeword_errors, gen_cat1, gen_cat2, loop_period,
                            pc_enlarged_grid, verify_stall)

P = default_params()


def describe(name, pat):
    counts = codeword_errors(P, pat.positions)
    print(f"{name}: {len(pat)} errors on {len(counts)} codewords, "
          f"per-codeword counts {sorted(counts.values())}")
    print(f"  plain iBDD: {verify_stall(pat)}")
    for v in ("ibdd", "ibdd_rapp", "ibdd_pipeline"):
        print(f"  {v:14s} residual after streaming decode: {run_pattern(pat, v)}")


print("-- product-code toy, enlarged grid --")
pc = ProductCodeModel()
pc.inject(pc_enlarged_grid())
print(f"injected {pc.residual()}, iBDD flips {pc.iterate(3)}")
print(f"Rapp flips {pc.rapp()} -> {pc.residual()} errors left, cleanup -> ", end="")
pc.iterate(2)
print(pc.residual())

print("\n-- OFEC geometry --")
describe("category 1, minimal", gen_cat1())
describe("category 1, enlarged", gen_cat1(variant="enlarged"))
cat2 = gen_cat2(seed=0, shape="regular")
describe("category 2, regular", cat2)
print(f"  period under half-alternating sweeps: {loop_period(cat2)}")
print(f"  miscorrecting codeword (chunk, col): {tuple(cat2.metadata['miscorrecting'])}")
