"""End-to-end experiment drivers: fidelity/K tables for the tested
commutation and anti-commutation relations, the relative-phase test and
the coincidence-dip scans with sinusoidal fits.

Random-number streams are derived from (seed, stream id, indices) so
that replicas and settings are independent and results do not depend on
evaluation order.  ``exact=True`` replaces every Poisson draw (including
bootstrap resampling) by its mean, which makes all error bars exactly
zero and is the mode used for analytic checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    anticommutator,
    bell_ket,
    commutator,
    hwp_unitary,
)
from .processor import NoiseModel, calibration_cascade, oracle_cascade
from .tomography import (
    ChoiMatrix,
    CountTable,
    TomographySettings,
    choi_from_kraus,
    expected_counts,
    extract_K,
    mle_reconstruct,
    process_fidelity,
    rng_stream,
    simulate_counts,
    COUNT_SCALE,
)

KINDS = ("commutator", "anticommutator")

U_PRESETS: dict[str, np.ndarray] = {
    "I": SIGMA_I,
    "X": SIGMA_X,
    "Y": SIGMA_Y,
    "Z": SIGMA_Z,
    "H": (SIGMA_X + SIGMA_Z) / np.sqrt(2),
    "XY": (SIGMA_X + SIGMA_Y) / np.sqrt(2),
    "YZ": (SIGMA_Y + SIGMA_Z) / np.sqrt(2),
}

# suite orderings follow the two results tables
COMMUTATOR_SUITE = ("X", "YZ", "Y", "XY", "H")
ANTICOMMUTATOR_SUITE = ("I", "Z", "YZ", "H")

# count-stream identifiers
_S_SIGNAL, _S_CALIB, _S_BOOT_SIG, _S_BOOT_CAL, _S_DIP, _S_BOOT_DIP = range(6)


def preset_unitary(label: str) -> np.ndarray:
    try:
        return U_PRESETS[label.upper()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"unknown preset {label!r}; expected one of {sorted(U_PRESETS)}") from None


def program_for(kind: str) -> np.ndarray:
    if kind == "commutator":
        return bell_ket("psi-")
    if kind == "anticommutator":
        return bell_ket("phi-")
    raise ValueError(f"kind must be 'commutator' or 'anticommutator', got {kind!r}")


def theory_operator(kind: str, u: np.ndarray) -> np.ndarray:
    """[Z, U] or {Z, U}."""
    op = commutator if kind == "commutator" else anticommutator
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    return op(SIGMA_Z, u)


def theory_k(kind: str, u: np.ndarray) -> float:
    """Theoretical normalization, sqrt(Tr(C^dag C) / 2) for C the (anti)commutator."""
    c = theory_operator(kind, u)
    return float(np.sqrt(np.trace(c.conj().T @ c).real / 2.0))


def theory_choi(kind: str, u: np.ndarray) -> ChoiMatrix:
    """Process matrix of the analytic (anti)commutator; trace 2 K_th^2."""
    return choi_from_kraus(theory_operator(kind, u))


@dataclass
class ProcessReport:
    """One row of a results table plus the rescaled process matrix."""

    u_label: str
    kind: str
    fidelity: float
    sigma_f: float
    k: float
    sigma_k: float
    k_th: float
    chi: np.ndarray  # rescaled so that Tr(chi) = 2 k^2
    noise: NoiseModel
    flux: float
    seed: int
    null_result: bool = False
    exact: bool = False
    u: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))


@dataclass
class DipScan:
    """Coincidence totals versus half-wave-plate angle, with fit results."""

    program: str
    alphas_deg: np.ndarray
    counts: np.ndarray
    expected: np.ndarray
    amplitude: float = math.nan
    offset: float = math.nan
    center_deg: float = math.nan
    visibility: float = math.nan
    sigma_v: float = math.nan
    rms_residual: float = math.nan
    dip_alpha_deg: float = math.nan
    flux: float = 0.0
    seed: int = 0
    exact: bool = False


def probability_grids(
    kind: str, u: np.ndarray, noise: NoiseModel, settings: TomographySettings
) -> tuple[np.ndarray, np.ndarray]:
    """(signal, calibration) probability grids over the probe x outcome settings."""
    program = program_for(kind)
    n_j, n_k = len(settings.probes), len(settings.outcomes)
    p_sig = np.empty((n_j, n_k))
    p_cal = np.empty((n_j, n_k))
    for j, probe in enumerate(settings.probes):
        rho_sig, _ = oracle_cascade(probe, program, u, noise)
        rho_cal, _ = calibration_cascade(probe, program, u)
        for k, pi in enumerate(settings.outcomes):
            p_sig[j, k] = np.trace(rho_sig @ pi).real
            p_cal[j, k] = np.trace(rho_cal @ pi).real
    # clip tiny negative round-off before Poisson sampling
    np.clip(p_sig, 0.0, None, out=p_sig)
    np.clip(p_cal, 0.0, None, out=p_cal)
    return p_sig, p_cal


def run_process_experiment(
    kind: str,
    u: np.ndarray,
    noise: NoiseModel | None = None,
    flux: float = 1e5,
    seed: int = 1,
    *,
    u_label: str = "U",
    replicas: int = 0,
    exact: bool = False,
) -> ProcessReport:
    """Full tomography pipeline for one (anti)commutator.

    Simulates the signal and matched calibration runs, reconstructs the
    process matrix, extracts K from the calibration totals and scores the
    fidelity against the analytic target.  ``replicas > 0`` adds
    parametric-bootstrap error bars on F and K.
    """
    if noise is None:
        noise = NoiseModel.ideal()
    settings = TomographySettings.standard(flux=flux, seed=seed)
    p_sig, p_cal = probability_grids(kind, u, noise, settings)
    if exact:
        sig = expected_counts(p_sig, flux)
        cal = expected_counts(p_cal, flux)
    else:
        sig = simulate_counts(p_sig, flux, seed, stream=_S_SIGNAL)
        cal = simulate_counts(p_cal, flux, seed, stream=_S_CALIB)

    k, sigma_k = extract_K(sig, cal)
    k_th = theory_k(kind, u)

    if sig.total() <= 0 or k < 3.0 * sigma_k:
        # vanishing (anti)commutator: nothing to reconstruct
        return ProcessReport(
            u_label=u_label, kind=kind, fidelity=math.nan, sigma_f=0.0,
            k=k, sigma_k=sigma_k, k_th=k_th, chi=np.zeros((4, 4), dtype=complex),
            noise=noise, flux=flux, seed=seed, null_result=True, exact=exact, u=np.array(u),
        )

    chi_unit = mle_reconstruct(sig, settings)
    chi_th = theory_choi(kind, u)
    fidelity = process_fidelity(chi_unit, chi_th)
    chi_scaled = chi_unit.rescaled(2.0 * k * k).matrix

    sigma_f = 0.0
    if replicas > 0 and not exact:
        sigma_f, sigma_k_boot = _bootstrap_report(
            chi_unit, p_cal, sig, cal, chi_th, settings, seed, replicas
        )
        sigma_k = sigma_k_boot

    return ProcessReport(
        u_label=u_label, kind=kind, fidelity=fidelity, sigma_f=sigma_f,
        k=k, sigma_k=sigma_k, k_th=k_th, chi=chi_scaled,
        noise=noise, flux=flux, seed=seed, exact=exact, u=np.array(u),
    )


def _bootstrap_report(
    chi_unit: ChoiMatrix,
    p_cal: np.ndarray,
    sig: CountTable,
    cal: CountTable,
    chi_th: ChoiMatrix,
    settings: TomographySettings,
    seed: int,
    replicas: int,
) -> tuple[float, float]:
    """Parametric bootstrap: resample counts from the fitted means and redo the pipeline."""
    if replicas < 50:
        raise ValueError("bootstrap needs at least 50 replicas")
    q = np.einsum("mij,ji->m", settings.effects(), chi_unit.matrix).real.reshape(p_cal.shape)
    np.clip(q, 0.0, None, out=q)
    mean_sig = sig.total() * q / q.sum()
    mean_cal = cal.total() * p_cal / p_cal.sum()
    f_vals = np.empty(replicas)
    k_vals = np.empty(replicas)
    for r in range(replicas):
        ns = rng_stream(seed, _S_BOOT_SIG, r).poisson(mean_sig).astype(float)
        nc = rng_stream(seed, _S_BOOT_CAL, r).poisson(mean_cal).astype(float)
        sig_r = CountTable(counts=ns, flux=sig.flux, seed=seed)
        cal_r = CountTable(counts=nc, flux=cal.flux, seed=seed)
        k_r, _ = extract_K(sig_r, cal_r)
        k_vals[r] = k_r
        if ns.sum() > 0:
            chi_r = mle_reconstruct(sig_r, settings, tol=1e-9)
            f_vals[r] = process_fidelity(chi_r, chi_th)
        else:
            f_vals[r] = math.nan
    return float(np.nanstd(f_vals, ddof=1)), float(np.std(k_vals, ddof=1))


def bootstrap_errors(obj, replicas: int = 200):
    """Bootstrap error bars: (sigma_F, sigma_K) for a report, sigma_V for a scan.

    Resampling uses the fitted/predicted means of the original run.  In
    exact (noise-free count) mode the replicas are all identical, so the
    returned sigmas are exactly zero.
    """
    if replicas < 50:
        raise ValueError("bootstrap needs at least 50 replicas")
    if isinstance(obj, ProcessReport):
        if obj.null_result:
            return 0.0, obj.sigma_k
        if obj.exact:
            return 0.0, 0.0
        report = run_process_experiment(
            obj.kind, obj.u, obj.noise, obj.flux, obj.seed,
            u_label=obj.u_label, replicas=replicas,
        )
        return report.sigma_f, report.sigma_k
    if isinstance(obj, DipScan):
        return _bootstrap_scan(obj, replicas)
    raise TypeError(f"cannot bootstrap object of type {type(obj).__name__}")


def phase_relation_test(
    noise: NoiseModel | None = None,
    flux: float = 1e5,
    seed: int = 1,
    *,
    replicas: int = 0,
    exact: bool = False,
) -> tuple[float, float]:
    """Fidelity of the U = (X+Y)/sqrt(2) commutator against (|HV> - i|VH>)/sqrt(2).

    By linearity the cascade output fixes the relative phase between the
    X and Y commutators; a high fidelity against this target confirms the
    relative phase factor of -1.
    """
    if noise is None:
        noise = NoiseModel.ideal()
    u = preset_unitary("XY")
    settings = TomographySettings.standard(flux=flux, seed=seed)
    p_sig, p_cal = probability_grids("commutator", u, noise, settings)
    sig = expected_counts(p_sig, flux) if exact else simulate_counts(p_sig, flux, seed, stream=_S_SIGNAL)
    chi_unit = mle_reconstruct(sig, settings)
    target = phase_relation_target()
    fid = process_fidelity(chi_unit, target)

    sigma = 0.0
    if replicas > 0 and not exact:
        cal = simulate_counts(p_cal, flux, seed, stream=_S_CALIB)
        sigma, _ = _bootstrap_report(chi_unit, p_cal, sig, cal, target, settings, seed, replicas)
    return fid, sigma


def phase_relation_target() -> ChoiMatrix:
    """Rank-1 target 8 |psi_U><psi_U| with |psi_U> = (|HV> - i|VH>)/sqrt(2)."""
    psi_u = np.array([0, 1, -1j, 0], dtype=complex) / np.sqrt(2)
    return ChoiMatrix(8.0 * np.outer(psi_u, psi_u.conj()))


def dip_scan(
    program: str,
    alphas_deg,
    noise: NoiseModel | None = None,
    flux: float = 1e5,
    seed: int = 1,
    *,
    exact: bool = False,
) -> DipScan:
    """Coincidence totals versus central half-wave-plate angle.

    For each angle the intermediate unitary is cos(2a) Z + sin(2a) X with
    the noise model's angle offset applied, and the success probabilities
    of the six probes are summed.  A |phi-> program ideally gives totals
    proportional to cos^2(2a) (zero at 45 deg), a |psi-> program
    sin^2(2a) (zero at 0 deg).
    """
    if noise is None:
        noise = NoiseModel.ideal()
    alphas = np.asarray(alphas_deg, dtype=float)
    if alphas.size == 0:
        raise ValueError("alpha grid must not be empty")
    prog_label = program.lower()
    prog = bell_ket(prog_label)
    settings = TomographySettings.standard(flux=flux, seed=seed)

    expected = np.zeros(alphas.size)
    counts = np.zeros(alphas.size)
    for i, alpha in enumerate(alphas):
        u = hwp_unitary(alpha + noise.hwp_offset_deg)
        for j, probe in enumerate(settings.probes):
            _, p = oracle_cascade(probe, prog, u, noise)
            mean = flux * COUNT_SCALE * max(p, 0.0)
            expected[i] += mean
            if not exact:
                counts[i] += rng_stream(seed, _S_DIP, i, j).poisson(mean)
    if exact:
        counts = expected.copy()
    return DipScan(
        program=prog_label, alphas_deg=alphas, counts=counts, expected=expected,
        flux=flux, seed=seed, exact=exact,
    )


def fit_visibility(scan: DipScan) -> tuple[float, float, float]:
    """Least-squares fit of a scan to a cos^2(2(alpha - alpha0)) + b.

    The center is grid-initialized over the 90-degree period and refined
    by golden-section search with the linear (a, b) subproblem solved
    exactly at each candidate.  Stores the fit on the scan and returns
    (visibility, alpha0_deg, rms_residual) with visibility a / (a + 2b).
    """
    alphas = np.asarray(scan.alphas_deg, dtype=float)
    y = np.asarray(scan.counts, dtype=float)
    if np.unique(alphas).size < 5:
        raise ValueError("fit requires at least 5 distinct angles")
    if alphas.max() - alphas.min() < 60.0:
        raise ValueError("fit requires a scan spanning at least 60 degrees")
    if np.ptp(y) <= 1e-9 * max(1.0, np.abs(y).max()):
        raise ValueError("degenerate scan: counts are constant, visibility is undefined")

    def solve(center):
        c = np.cos(np.radians(2.0 * (alphas - center))) ** 2
        design = np.column_stack([c, np.ones_like(c)])
        coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - design @ coef
        return float(resid @ resid), float(coef[0]), float(coef[1])

    grid = np.arange(-45.0, 45.0, 0.5)
    sses = [solve(c)[0] for c in grid]
    best = grid[int(np.argmin(sses))]

    lo, hi = best - 0.5, best + 0.5
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = solve(x1)[0], solve(x2)[0]
    while hi - lo > 1e-7:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = solve(x1)[0]
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = solve(x2)[0]
    center = 0.5 * (lo + hi)
    sse, a, b = solve(center)

    if a < 0:  # equivalent parameterization with positive amplitude
        a, b, center = -a, a + b, center + 45.0
    if b < 0:  # clamp the floor at zero counts and refit the amplitude
        c = np.cos(np.radians(2.0 * (alphas - center))) ** 2
        a = float((c @ y) / (c @ c))
        b = 0.0
        sse = float(np.sum((y - a * c) ** 2))
    center = (center + 45.0) % 90.0 - 45.0

    scan.amplitude = a
    scan.offset = b
    scan.center_deg = center
    scan.visibility = a / (a + 2.0 * b)
    scan.rms_residual = float(np.sqrt(sse / y.size))
    scan.dip_alpha_deg = _nearest_dip(center, alphas)
    return scan.visibility, center, scan.rms_residual


def _nearest_dip(center: float, alphas: np.ndarray) -> float:
    """Fitted-curve minimum closest to the scanned interval."""
    lo, hi = float(alphas.min()), float(alphas.max())
    mid = 0.5 * (lo + hi)
    candidates = center + 45.0 + 90.0 * np.arange(-5, 6)
    inside = [c for c in candidates if lo - 1e-9 <= c <= hi + 1e-9]
    if inside:
        return float(min(inside, key=lambda c: abs(c - mid)))
    return float(min(candidates, key=lambda c: min(abs(c - lo), abs(c - hi))))


def _bootstrap_scan(scan: DipScan, replicas: int) -> float:
    if math.isnan(scan.visibility):
        fit_visibility(scan)
    if scan.exact:
        scan.sigma_v = 0.0
        return 0.0
    alphas = scan.alphas_deg
    means = scan.amplitude * np.cos(np.radians(2.0 * (alphas - scan.center_deg))) ** 2 + scan.offset
    np.clip(means, 0.0, None, out=means)
    vis = np.empty(replicas)
    for r in range(replicas):
        counts = rng_stream(scan.seed, _S_BOOT_DIP, r).poisson(means).astype(float)
        replica = DipScan(
            program=scan.program, alphas_deg=alphas, counts=counts, expected=scan.expected,
            flux=scan.flux, seed=scan.seed, exact=False,
        )
        try:
            vis[r], _, _ = fit_visibility(replica)
        except ValueError:
            vis[r] = math.nan
    sigma = float(np.nanstd(vis, ddof=1))
    scan.sigma_v = sigma
    return sigma


def fit_noise_to_visibility(
    program: str,
    target: float,
    alphas_deg=None,
    *,
    hwp_offset_deg: float = 0.0,
    tol: float = 1e-3,
) -> tuple[float, float]:
    """Find the shared overlap v giving a fitted dip visibility equal to target.

    Bisection on v in (0, 1) using exact expected counts, since the fitted
    visibility increases monotonically with the overlap.  Returns
    (v_star, achieved_visibility).
    """
    if not (0.0 < target < 1.0):
        raise ValueError("target visibility must lie strictly between 0 and 1")
    if alphas_deg is None:
        alphas_deg = np.arange(0.0, 90.1, 5.0) if program.lower() == "phi-" else np.arange(-45.0, 45.1, 5.0)

    def vis_at(v):
        noise = NoiseModel(v1=v, v2=v, hwp_offset_deg=hwp_offset_deg)
        scan = dip_scan(program, alphas_deg, noise, flux=1.0, seed=0, exact=True)
        visibility, _, _ = fit_visibility(scan)
        return visibility

    lo, hi = 0.05, 1.0
    if vis_at(lo) > target:
        lo = 1e-3
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        v_mid = vis_at(mid)
        if abs(v_mid - target) < tol:
            return mid, v_mid
        if v_mid < target:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return mid, vis_at(mid)
