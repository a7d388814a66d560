"""Space-time polar coded modulation over Rayleigh fast-fading MIMO channels.

Submodules
----------
polar        polar transform, SC / SCL decoders
crc          CRC attach / check and CRC-aided list selection
modem        set-partition labeled square QAM and level LLRs
mimo         fading draws, QR factorization, successive cancellation
construction reliability evaluation and information-set selection
scheme       multilevel space-time encoder and multistage decoder
sim          Monte-Carlo BLER harness and CSV output
cli          command-line front end
"""

from .construction import (
    CodeConstruction,
    awgn_capacity_qam,
    bec_bhattacharyya,
    build_construction,
    equivalent_awgn_sigma,
    ergodic_stream_capacity,
    ga_evolve,
    mimo_ergodic_capacity,
    solve_equivalent_sigma,
)
from .crc import DEFAULT_CRC, CrcSpec, cascl_select, crc_attach, crc_check
from .mimo import ChannelRealization, qr_decompose, sample_channel, sic_observation
from .modem import Constellation, build_sp_qam, level_llr, map_symbol
from .polar import (
    DecoderPath,
    WorkCounter,
    bit_reversal_permutation,
    polar_encode,
    sc_decode,
    scl_decode,
)
from .scheme import (
    PairInterleaver,
    index_map,
    index_unmap,
    stpcm_decode_cascl,
    stpcm_decode_sc,
    stpcm_encode,
)
from .sim import BlerRecord, SimConfig, emit_csv, run_sweep, simulate_point

__version__ = "0.1.0"
