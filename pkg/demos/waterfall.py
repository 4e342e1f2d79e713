"""Short 16-QAM waterfall for the three decoders, written to waterfall_<decoder>.csv.

    python demos/waterfall.py [errors-per-point]

A point takes seconds at 14.0 dB and about a minute near 1e-6.
"""

import sys

from ofec.channel import ChannelModel, prefec_ber_theoretical
from ofec.sim import SimConfig, run_sweep

SNRS = [14.0, 14.05, 14.1, 14.15]
target = int(sys.argv[1]) if len(sys.argv) > 1 else 100

for snr in SNRS:
    print(f"{snr:.2f} dB  theoretical pre-FEC BER {prefec_ber_theoretical(ChannelModel('qam16', snr_db=snr)):.4f}")


def show(r):
    print(f"  {r.snr_db:.2f} dB  post-FEC {r.post_fec_ber:.2e}  ({r.bit_errors} errors / {r.bits_simulated:.2e} bits)")


for dec in ("ibdd", "ibdd_rapp", "ibdd_pipeline"):
    print(f"\n{dec}")
    run_sweep(SimConfig(snr_db=SNRS, decoder=dec, target_bit_errors=target, seed=1,
                        out=f"waterfall_{dec}.csv"), progress=show)
