"""Error-correction simulations under non-Markovian amplitude damping."""

from nmqec.channel import SignedKrausMap, TransferMatrix, apply, compose, intermediate_map, is_cp, to_choi
from nmqec.codes import Code, code_by_name, five_qubit_code, four_qubit_code, stabilizer_code
from nmqec.noise import NoiseParams, ad_noise, gamma_of_t, noise_at, preset
from nmqec.recovery import RecoverySpec, leung, petz, syndrome_recovery

__version__ = "0.1.0"

__all__ = [
    "SignedKrausMap",
    "TransferMatrix",
    "apply",
    "compose",
    "intermediate_map",
    "is_cp",
    "to_choi",
    "Code",
    "code_by_name",
    "five_qubit_code",
    "four_qubit_code",
    "stabilizer_code",
    "NoiseParams",
    "ad_noise",
    "gamma_of_t",
    "noise_at",
    "preset",
    "RecoverySpec",
    "leung",
    "petz",
    "syndrome_recovery",
]
