"""Process tomography: probe/measurement model, synthetic counting,
maximum-likelihood reconstruction and normalization extraction.

Channels act on one polarization qubit and are represented by 4x4
process matrices in the (output subsystem x input subsystem) order,
chi = sum_ij (K|i><j|K^dag) x |i><j| for a Kraus operator K, so that
Tr chi = Tr(K^dag K).

Counting convention: a setting with probability p contributes Poisson
counts with mean ``flux * 16 * p``, anchoring ``flux`` to the expected
count of a calibration setting (success probability 1/16 per gate pair).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _mle
from .algebra import SIGMA_I, ket, projector, tensor
from .processor import KrausChannel

PROBE_LABELS = ("H", "V", "D", "A", "R", "L")
COUNT_SCALE = 16.0  # counts per unit flux at probability 1


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent, reproducible generator for (seed, *key).

    All randomness in the package flows through this helper so that
    results are independent of evaluation order.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key)))


@dataclass(frozen=True)
class TomographySettings:
    """Six probe kets and six outcome projectors grouped into three bases."""

    probes: tuple = field(default_factory=tuple)
    outcomes: tuple = field(default_factory=tuple)
    flux: float = 1e5
    seed: int = 1

    @classmethod
    def standard(cls, flux: float = 1e5, seed: int = 1) -> "TomographySettings":
        kets = tuple(ket(lbl) for lbl in PROBE_LABELS)
        return cls(
            probes=kets,
            outcomes=tuple(projector(k) for k in kets),
            flux=float(flux),
            seed=int(seed),
        )

    def effects(self) -> np.ndarray:
        """Stacked effects E_jk = Pi_k (x) rho_j^T, shape (36, 4, 4), row-major in (j, k)."""
        e = np.empty((len(self.probes) * len(self.outcomes), 4, 4), dtype=complex)
        for j, probe in enumerate(self.probes):
            rho_t = projector(probe).T
            for k, pi in enumerate(self.outcomes):
                e[j * len(self.outcomes) + k] = tensor(pi, rho_t)
        return e


@dataclass(frozen=True)
class CountTable:
    """Per-setting coincidence counts on the probe x outcome grid."""

    counts: np.ndarray
    flux: float
    seed: int | None

    def total(self) -> float:
        return float(self.counts.sum())


@dataclass(frozen=True)
class ChoiMatrix:
    """4x4 process matrix; ``scale`` is its trace."""

    matrix: np.ndarray

    @property
    def scale(self) -> float:
        return float(np.trace(self.matrix).real)

    def rescaled(self, trace: float) -> "ChoiMatrix":
        current = self.scale
        if current <= 0.0:
            raise ValueError("cannot rescale a zero-trace process matrix")
        return ChoiMatrix(self.matrix * (trace / current))


_BELL_PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def choi_from_kraus(c) -> ChoiMatrix:
    """Process matrix of rho -> C rho C^dag, i.e. 2 (C x I)|phi+><phi+|(C x I)^dag."""
    k = c.kraus if isinstance(c, KrausChannel) else np.asarray(c, dtype=complex)
    v = tensor(k, SIGMA_I) @ _BELL_PHI_PLUS
    return ChoiMatrix(2.0 * np.outer(v, v.conj()))


def _as_matrix(chi) -> np.ndarray:
    return chi.matrix if isinstance(chi, ChoiMatrix) else np.asarray(chi, dtype=complex)


def predict_probabilities(channel, settings: TomographySettings) -> np.ndarray:
    """6x6 grid p_jk = Tr[K rho_j K^dag Pi_k], or Tr[chi (Pi_k x rho_j^T)] for a process matrix."""
    nj, nk = len(settings.probes), len(settings.outcomes)
    p = np.empty((nj, nk))
    if isinstance(channel, KrausChannel):
        for j, probe in enumerate(settings.probes):
            out = channel.apply(projector(probe))
            for k, pi in enumerate(settings.outcomes):
                p[j, k] = np.trace(out @ pi).real
    else:
        chi = _as_matrix(channel)
        e = settings.effects()
        p[:] = np.einsum("mij,ji->m", e, chi).real.reshape(nj, nk)
    return p


def expected_counts(p: np.ndarray, flux: float) -> CountTable:
    """Noise-free count table holding the exact Poisson means."""
    p = np.asarray(p, dtype=float)
    _check_probs(p, flux)
    return CountTable(counts=flux * COUNT_SCALE * p, flux=float(flux), seed=None)


def simulate_counts(p: np.ndarray, flux: float, seed: int, stream: int = 0) -> CountTable:
    """Draw the count grid, entry (j, k) from Poisson(flux * 16 * p_jk).

    Each entry uses the generator ``rng_stream(seed, stream, j, k)`` and is
    therefore reproducible in isolation.
    """
    p = np.asarray(p, dtype=float)
    _check_probs(p, flux)
    counts = np.empty(p.shape, dtype=np.int64)
    for j in range(p.shape[0]):
        for k in range(p.shape[1]):
            counts[j, k] = rng_stream(seed, stream, j, k).poisson(flux * COUNT_SCALE * p[j, k])
    return CountTable(counts=counts, flux=float(flux), seed=int(seed))


def _check_probs(p: np.ndarray, flux: float) -> None:
    if flux <= 0:
        raise ValueError("flux must be positive")
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")


def mle_reconstruct(
    counts: CountTable,
    settings: TomographySettings,
    *,
    max_iter: int = 100_000,
    tol: float = 1e-10,
    epsilon: float = 0.1,
) -> ChoiMatrix:
    """Maximum-likelihood process matrix (unit trace) from a count table.

    Runs the diluted R-chi-R fixed-point iteration from the maximally
    mixed starting point; see :mod:`pauliproc._mle` for the kernel.
    """
    n = np.asarray(counts.counts, dtype=float).ravel()
    if n.sum() <= 0:
        raise ValueError("count table is empty; a vanishing channel has no tomographic content")
    chi0 = np.eye(4, dtype=complex) / 4.0
    chi, _, _, _, _ = _mle.iterate(settings.effects(), n, chi0, max_iter, tol, epsilon)
    return ChoiMatrix(chi)


def extract_K(signal_counts: CountTable, calibration_counts: CountTable) -> tuple[float, float]:
    """Normalization factor K = sqrt(2 N_sig / N_cal) with its Poisson error.

    N are grand totals over the 36 settings; the calibration run anchors
    the absolute success probability at 1/16 per setting, from which
    Tr(chi) = 2 K^2 follows.  The error bar is first-order Poisson
    propagation, sigma_K = sqrt((N_sig + N_cal) / (2 N_cal^2)).
    """
    n_sig = signal_counts.total()
    n_cal = calibration_counts.total()
    if n_cal <= 0:
        raise ValueError("calibration total must be positive")
    k = float(np.sqrt(2.0 * n_sig / n_cal))
    sigma = float(np.sqrt((n_sig + n_cal) / (2.0 * n_cal**2)))
    return k, sigma


def process_fidelity(chi, chi_th) -> float:
    """Normalized overlap Tr[chi chi_th] / (Tr chi * Tr chi_th) for a rank-1 target."""
    a = _as_matrix(chi)
    b = _as_matrix(chi_th)
    ta = float(np.trace(a).real)
    tb = float(np.trace(b).real)
    if ta <= 0 or tb <= 0:
        raise ValueError("process fidelity requires positive-trace inputs")
    w = np.linalg.eigvalsh(b)
    if w[-2] > 1e-9 * w[-1]:
        raise ValueError("theory target must be rank-1 (proportional to a pure-state projector)")
    return float(np.trace(a @ b).real / (ta * tb))
