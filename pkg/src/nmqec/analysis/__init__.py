"""Fidelity, Bloch-matrix, divisibility and bound computations."""

from nmqec.analysis.bloch import (
    MMatrix,
    bloch_fidelity,
    bloch_vector,
    leakage,
    m_from_action,
    m_matrix,
    unitality_defect,
    wcf_from_bloch,
)
from nmqec.analysis.bounds import PetzLoss, exact_qec_infidelity, leung_bounds, petz_infidelity
from nmqec.analysis.divisibility import (
    DivisibilityReport,
    EigenTrack,
    mask_intervals,
    p_divisibility_scan,
    track_eigenvalues,
)
from nmqec.analysis.fidelity import (
    FidelityCurve,
    channel_fidelity,
    fidelity_from_action,
    grid_minimum,
    logical_action,
    state_fidelity,
    worst_case_fidelity,
)
from nmqec.analysis.fitting import poly_eval, poly_fit

__all__ = [
    "MMatrix",
    "bloch_fidelity",
    "bloch_vector",
    "leakage",
    "m_from_action",
    "m_matrix",
    "unitality_defect",
    "wcf_from_bloch",
    "PetzLoss",
    "exact_qec_infidelity",
    "leung_bounds",
    "petz_infidelity",
    "DivisibilityReport",
    "EigenTrack",
    "mask_intervals",
    "p_divisibility_scan",
    "track_eigenvalues",
    "FidelityCurve",
    "channel_fidelity",
    "fidelity_from_action",
    "grid_minimum",
    "logical_action",
    "state_fidelity",
    "worst_case_fidelity",
    "poly_eval",
    "poly_fit",
]
