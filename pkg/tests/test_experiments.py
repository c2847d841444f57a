import math

import numpy as np
import pytest

from pauliproc.algebra import bell_ket, pauli
from pauliproc.processor import NoiseModel
from pauliproc.experiments import (
    ANTICOMMUTATOR_SUITE,
    COMMUTATOR_SUITE,
    DipScan,
    bootstrap_errors,
    dip_scan,
    fit_noise_to_visibility,
    fit_visibility,
    phase_relation_test,
    preset_unitary,
    run_process_experiment,
    theory_choi,
    theory_k,
)
from pauliproc.tomography import ChoiMatrix, process_fidelity

Z = pauli("Z")
X = pauli("X")

K_TH_COMMUTATOR = (2.0, np.sqrt(2), 2.0, 2.0, np.sqrt(2))
K_TH_ANTICOMMUTATOR = (2.0, 2.0, np.sqrt(2), np.sqrt(2))


class TestTheoryValues:
    def test_commutator_suite_k(self):
        got = [theory_k("commutator", preset_unitary(lbl)) for lbl in COMMUTATOR_SUITE]
        assert np.allclose(got, K_TH_COMMUTATOR, atol=1e-14)

    def test_anticommutator_suite_k(self):
        got = [theory_k("anticommutator", preset_unitary(lbl)) for lbl in ANTICOMMUTATOR_SUITE]
        assert np.allclose(got, K_TH_ANTICOMMUTATOR, atol=1e-14)

    def test_choi_targets_are_bell_projectors(self):
        targets = {
            ("commutator", "X"): "psi-",
            ("commutator", "Y"): "psi+",
            ("anticommutator", "I"): "phi-",
            ("anticommutator", "Z"): "phi+",
        }
        for (kind, lbl), bell in targets.items():
            chi = theory_choi(kind, preset_unitary(lbl))
            k = bell_ket(bell)
            expected = 8.0 * np.outer(k, k.conj())
            assert np.abs(chi.matrix - expected).max() < 1e-13


class TestProcessExperiment:
    @pytest.mark.parametrize(
        "kind,label,k_th",
        [(k, l, kt) for k, suite, ks in (
            ("commutator", COMMUTATOR_SUITE, K_TH_COMMUTATOR),
            ("anticommutator", ANTICOMMUTATOR_SUITE, K_TH_ANTICOMMUTATOR),
        ) for l, kt in zip(suite, ks) for k in [k]],
    )
    def test_exact_counts_reproduce_theory(self, kind, label, k_th):
        report = run_process_experiment(
            kind, preset_unitary(label), flux=1e5, seed=1, u_label=label, exact=True
        )
        assert report.fidelity >= 1 - 1e-6
        assert abs(report.k - k_th) <= 1e-9
        assert abs(np.trace(report.chi).real - 2 * report.k**2) < 1e-9

    def test_poisson_run_close_to_theory(self):
        report = run_process_experiment("commutator", X, flux=1e5, seed=1, u_label="X")
        assert report.fidelity >= 0.99
        assert abs(report.k - 2.0) <= 3 * report.sigma_k

    def test_null_commutator_reported_not_raised(self):
        report = run_process_experiment("commutator", Z, flux=1e4, seed=2, u_label="Z")
        assert report.null_result
        assert report.k < 3 * report.sigma_k
        assert math.isnan(report.fidelity)

    def test_anticommutator_hadamard_matches_z_case_shape(self):
        u_h = preset_unitary("H")
        rep_h = run_process_experiment("anticommutator", u_h, flux=1e5, seed=3, u_label="H", exact=True)
        rep_z = run_process_experiment("anticommutator", pauli("Z"), flux=1e5, seed=3, u_label="Z", exact=True)
        f = process_fidelity(ChoiMatrix(rep_h.chi), ChoiMatrix(rep_z.chi))
        assert f >= 1 - 1e-6  # same shape, different normalization
        assert rep_h.k == pytest.approx(np.sqrt(2), abs=1e-9)
        assert rep_z.k == pytest.approx(2.0, abs=1e-9)

    def test_seeded_determinism(self):
        a = run_process_experiment("commutator", X, flux=1e4, seed=5, u_label="X")
        b = run_process_experiment("commutator", X, flux=1e4, seed=5, u_label="X")
        assert a.fidelity == b.fidelity
        assert a.k == b.k
        assert np.array_equal(a.chi, b.chi)

    def test_fidelity_monotone_in_interference_loss(self):
        previous = 2.0
        for v in np.arange(1.0, 0.59, -0.05):
            noise = NoiseModel(v1=v, v2=v)
            report = run_process_experiment("commutator", X, noise, flux=1e5, seed=1, exact=True)
            assert report.fidelity <= previous + 1e-9
            previous = report.fidelity
        assert previous < 1.0


class TestPhaseRelation:
    def test_ideal_run_confirms_negative_relative_phase(self):
        f, sigma = phase_relation_test(flux=1e5, seed=1, exact=True)
        assert f >= 0.99
        assert sigma == 0.0

    def test_bootstrap_sigma_under_poisson(self):
        f, sigma = phase_relation_test(flux=1e4, seed=2, replicas=60)
        assert f >= 0.99
        assert 0.0 < sigma < 0.05

    def test_orthogonal_target_rejected_by_data(self):
        from pauliproc.experiments import probability_grids, preset_unitary
        from pauliproc.tomography import TomographySettings, expected_counts, mle_reconstruct

        settings = TomographySettings.standard(flux=1e5, seed=1)
        p_sig, _ = probability_grids("commutator", preset_unitary("XY"), NoiseModel.ideal(), settings)
        chi_hat = mle_reconstruct(expected_counts(p_sig, 1e5), settings)
        flipped = np.array([0, 1, 1j, 0], dtype=complex) / np.sqrt(2)
        f_wrong = process_fidelity(chi_hat, ChoiMatrix(np.outer(flipped, flipped.conj())))
        assert f_wrong < 1e-6


class TestDipScan:
    def test_ideal_triplet_scan_follows_cosine_squared(self):
        alphas = np.arange(0.0, 90.1, 5.0)
        scan = dip_scan("phi-", alphas, flux=1e4, seed=1, exact=True)
        assert scan.expected[alphas.tolist().index(45.0)] == pytest.approx(0.0, abs=1e-9)
        ratio = scan.expected[0] / scan.expected[alphas.tolist().index(30.0)]
        assert ratio == pytest.approx(4.0, abs=1e-9)  # cos^2(0) / cos^2(60 deg)

    def test_ideal_singlet_scan_zero_at_origin(self):
        alphas = np.arange(-45.0, 45.1, 5.0)
        scan = dip_scan("psi-", alphas, flux=1e4, seed=1, exact=True)
        assert scan.expected[alphas.tolist().index(0.0)] == pytest.approx(0.0, abs=1e-9)

    def test_dip_parity(self):
        alphas = np.arange(0.0, 90.1, 5.0)
        scan = dip_scan("phi-", alphas, flux=1e4, seed=1, exact=True)
        sym = scan.expected[::-1]  # reflection about 45 deg
        assert np.abs(scan.expected - sym).max() < 1e-9
        alphas2 = np.arange(-45.0, 45.1, 5.0)
        scan2 = dip_scan("psi-", alphas2, flux=1e4, seed=1, exact=True)
        assert np.abs(scan2.expected - scan2.expected[::-1]).max() < 1e-9

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            dip_scan("phi-", [], flux=1e4, seed=1)


class TestFitVisibility:
    def synthetic(self, a, b, alpha0=0.0, alphas=None):
        if alphas is None:
            alphas = np.arange(0.0, 90.1, 5.0)
        counts = a * np.cos(np.radians(2 * (alphas - alpha0))) ** 2 + b
        return DipScan(
            program="phi-", alphas_deg=alphas, counts=counts, expected=counts.copy(),
            flux=1.0, seed=0, exact=True,
        )

    def test_pure_cosine_fits_exactly(self):
        scan = self.synthetic(1000.0, 0.0)
        v, alpha0, rms = fit_visibility(scan)
        assert v == pytest.approx(1.0, abs=1e-6)
        assert alpha0 == pytest.approx(0.0, abs=1e-6)
        assert rms < 1e-6

    def test_offset_curve_visibility(self):
        scan = self.synthetic(800.0, 100.0)
        v, _, _ = fit_visibility(scan)
        assert v == pytest.approx(0.8, abs=1e-6)

    def test_shifted_center_recovered(self):
        scan = self.synthetic(500.0, 20.0, alpha0=7.0)
        _, alpha0, _ = fit_visibility(scan)
        assert alpha0 == pytest.approx(7.0, abs=1e-4)

    def test_degenerate_scan_rejected(self):
        scan = self.synthetic(0.0, 100.0)
        with pytest.raises(ValueError, match="degenerate"):
            fit_visibility(scan)

    def test_too_few_angles_rejected(self):
        scan = self.synthetic(100.0, 0.0, alphas=np.array([0.0, 30.0, 60.0, 90.0]))
        with pytest.raises(ValueError, match="5 distinct"):
            fit_visibility(scan)

    def test_narrow_span_rejected(self):
        scan = self.synthetic(100.0, 0.0, alphas=np.arange(0.0, 50.0, 5.0))
        with pytest.raises(ValueError, match="60 degrees"):
            fit_visibility(scan)

    def test_ideal_scan_offset_negligible(self):
        scan = dip_scan("phi-", np.arange(0.0, 90.1, 5.0), flux=1e4, seed=1, exact=True)
        fit_visibility(scan)
        assert scan.offset <= 1e-6 * scan.amplitude

    def test_visibility_bounded_under_poisson(self):
        scan = dip_scan("phi-", np.arange(0.0, 90.1, 5.0), flux=50.0, seed=21)
        v, _, _ = fit_visibility(scan)
        assert 0.0 <= v <= 1.0

    def test_ideal_scan_dip_positions(self):
        scan = dip_scan("phi-", np.arange(0.0, 90.1, 5.0), flux=1e4, seed=1, exact=True)
        fit_visibility(scan)
        assert scan.dip_alpha_deg == pytest.approx(45.0, abs=0.1)
        scan2 = dip_scan("psi-", np.arange(-45.0, 45.1, 5.0), flux=1e4, seed=1, exact=True)
        fit_visibility(scan2)
        assert scan2.dip_alpha_deg == pytest.approx(0.0, abs=0.1)

    def test_hwp_offset_shifts_fitted_center(self):
        delta = 4.0
        noise = NoiseModel(hwp_offset_deg=delta)
        scan = dip_scan("phi-", np.arange(0.0, 90.1, 5.0), noise, flux=1e4, seed=1, exact=True)
        _, alpha0, _ = fit_visibility(scan)
        # a positive offset moves the observed pattern to lower commanded angles
        assert alpha0 == pytest.approx(-delta, abs=0.1)


class TestBootstrap:
    def test_exact_mode_sigma_is_zero(self):
        scan = dip_scan("phi-", np.arange(0.0, 90.1, 5.0), flux=1e4, seed=1, exact=True)
        fit_visibility(scan)
        assert bootstrap_errors(scan, replicas=50) == 0.0

    def test_scan_sigma_positive_under_poisson(self):
        scan = dip_scan("phi-", np.arange(0.0, 90.1, 5.0), flux=100.0, seed=1)
        fit_visibility(scan)
        sigma = bootstrap_errors(scan, replicas=60)
        assert 0.0 < sigma < 0.2
        assert scan.sigma_v == sigma

    def test_report_sigmas(self):
        report = run_process_experiment(
            "commutator", X, flux=1e4, seed=1, u_label="X", replicas=60
        )
        assert 0.0 < report.sigma_f < 0.05
        assert 0.0 < report.sigma_k < 0.05

    def test_minimum_replicas_enforced(self):
        scan = dip_scan("phi-", np.arange(0.0, 90.1, 5.0), flux=100.0, seed=1)
        fit_visibility(scan)
        with pytest.raises(ValueError, match="50"):
            bootstrap_errors(scan, replicas=10)


class TestNoiseFit:
    def test_matches_target_visibility(self):
        v_star, achieved = fit_noise_to_visibility("phi-", 0.846)
        assert 0.0 < v_star < 1.0
        assert abs(achieved - 0.846) <= 0.01

    def test_rejects_unreachable_target(self):
        with pytest.raises(ValueError):
            fit_noise_to_visibility("phi-", 1.5)
