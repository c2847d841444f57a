"""Simulator of a two-gate programmable polarization processor that
realizes commutators and anti-commutators of Pauli operators, together
with its analysis pipeline: maximum-likelihood process tomography,
calibration-based normalization and coincidence-dip visibility fits.
"""

from ._mle import BACKEND as MLE_BACKEND
from .algebra import (
    anticommutator,
    bell_ket,
    commutator,
    hwp_unitary,
    ket,
    pauli,
    tensor,
)
from .processor import (
    KrausChannel,
    NoiseModel,
    calibration_cascade,
    cascade_kraus,
    oracle_cascade,
    pbs_postselect_map,
    single_gate_kraus,
)
from .tomography import (
    ChoiMatrix,
    CountTable,
    TomographySettings,
    choi_from_kraus,
    extract_K,
    mle_reconstruct,
    predict_probabilities,
    process_fidelity,
    simulate_counts,
)
from .experiments import (
    DipScan,
    ProcessReport,
    bootstrap_errors,
    dip_scan,
    fit_noise_to_visibility,
    fit_visibility,
    phase_relation_test,
    run_process_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "MLE_BACKEND",
    "pauli", "ket", "bell_ket", "commutator", "anticommutator", "tensor", "hwp_unitary",
    "NoiseModel", "KrausChannel", "single_gate_kraus", "cascade_kraus",
    "pbs_postselect_map", "oracle_cascade", "calibration_cascade",
    "TomographySettings", "CountTable", "ChoiMatrix", "choi_from_kraus",
    "predict_probabilities", "simulate_counts", "mle_reconstruct", "extract_K",
    "process_fidelity",
    "ProcessReport", "DipScan", "run_process_experiment", "phase_relation_test",
    "dip_scan", "fit_visibility", "bootstrap_errors", "fit_noise_to_visibility",
    "__version__",
]
