"""Hard-decision channels: Gray 16-QAM and BPSK over AWGN, plus a BSC.

SNR convention: Es/N0 per symbol for 16-QAM (unit average symbol energy),
Eb/N0 for BPSK. Noise is real Gaussian with variance Es / (2 snr) per
dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

KINDS = ("qam16", "bpsk", "bsc")

# reflected Gray code per axis: bit pair (b0 b1) -> amplitude
GRAY_PAM4 = {(0, 0): -3, (0, 1): -1, (1, 1): 1, (1, 0): 3}
_PAM4_SCALE = 1 / np.sqrt(10.0)
_LEVEL_BITS = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.uint8)  # level -3,-1,1,3


@dataclass(frozen=True)
class ChannelModel:
    kind: str = "qam16"
    snr_db: float | None = None
    p: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == "bsc":
            if self.p is None or not 0.0 <= self.p <= 0.5:
                raise ValueError("bsc needs a crossover probability p in [0, 0.5]")
        elif self.snr_db is None:
            raise ValueError(f"{self.kind} needs snr_db")

    @property
    def bits_per_symbol(self):
        return {"qam16": 4, "bpsk": 1, "bsc": 1}[self.kind]

    @property
    def sigma(self):
        """Noise standard deviation per real dimension (Es = 1)."""
        if self.kind == "bsc":
            raise ValueError("bsc has no noise variance")
        snr = 10.0 ** (self.snr_db / 10.0)
        return float(np.sqrt(1.0 / (2.0 * snr))) if np.isfinite(snr) else 0.0

    def rng(self):
        return np.random.default_rng(self.rng_seed)


def _qam_axis(bits2):
    """(..., 2) bits -> PAM-4 level index 0..3 (levels -3,-1,1,3)."""
    b0, b1 = bits2[..., 0], bits2[..., 1]
    # gray inverse: index = 2*b0 + (b0 ^ b1)
    return 2 * b0 + (b0 ^ b1)


def transmit_hard(bits, model, rng=None):
    """Send a bit vector through the channel and return hard decisions."""
    rng = model.rng() if rng is None else rng
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if bits.size % model.bits_per_symbol:
        raise ValueError(f"{bits.size} bits not divisible by {model.bits_per_symbol} bits/symbol")
    if model.kind == "bsc":
        return bits ^ (rng.random(bits.size) < model.p).astype(np.uint8)
    sigma = model.sigma
    if model.kind == "bpsk":
        x = 1.0 - 2.0 * bits
        y = x + sigma * rng.standard_normal(bits.size)
        return (y < 0).astype(np.uint8)
    pairs = bits.reshape(-1, 2)
    level = _qam_axis(pairs).astype(np.float64)
    amp = (2.0 * level - 3.0) * _PAM4_SCALE
    # I and Q are consecutive pairs; noise is iid per real dimension either way
    y = amp + sigma * rng.standard_normal(amp.size)
    idx = np.clip(np.floor(y / _PAM4_SCALE / 2.0 + 2.0), 0, 3).astype(np.intp)
    return _LEVEL_BITS[idx].reshape(-1)


def qfunc(x):
    return norm.sf(x)


def prefec_ber_theoretical(model):
    """Closed-form bit-error probability under Gray mapping and hard decisions."""
    if model.kind == "bsc":
        raise ValueError("bsc crossover probability is already the bit-error rate")
    snr = 10.0 ** (model.snr_db / 10.0)
    if not np.isfinite(snr):
        return 0.0
    if model.kind == "bpsk":
        return float(qfunc(np.sqrt(2.0 * snr)))
    # per PAM-4 axis, half-spacing d = 1/sqrt(10), sigma^2 = 1/(2 snr): d/sigma = sqrt(snr/5)
    u = np.sqrt(snr / 5.0)
    q1, q3, q5 = qfunc(u), qfunc(3 * u), qfunc(5 * u)
    return float((3 * q1 + 2 * q3 - q5) / 4)


def snr_for_ber(target, kind="qam16", lo=-5.0, hi=30.0):
    """Invert prefec_ber_theoretical by bisection (BER is monotone in SNR)."""
    from scipy.optimize import brentq

    f = lambda s: prefec_ber_theoretical(ChannelModel(kind, snr_db=s)) - target
    return float(brentq(f, lo, hi, xtol=1e-10))
