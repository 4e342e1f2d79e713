"""Hard-decision decoding of the OFEC spatially coupled code with stall-pattern removal."""

from .channel import ChannelModel, prefec_ber_theoretical, transmit_hard
from .core import ChunkAddress, Interleaver, OfecEncoder, OfecParams, coupled_position, default_params
from .galois_bch import BddOutcome, BddTag, EbchCode, GaloisField, bdd_decode, default_code, gf_mul
from .ibdd import ChunkBuffer, DecodeSchedule, StreamDecoder, bdd_pass, decode_stream, mrbdd_pass
from .sim import BerRecord, SimConfig, run_point, run_regression, run_sweep
from .spr import SprPipelineConfig, run_pipeline, spr1, spr2, spr3, spr_rapp
from .stall_lab import ErrorPattern, gen_cat1, gen_cat2, load_corpus, save_corpus, verify_stall

__version__ = "0.1.0"
