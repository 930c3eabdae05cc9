import numpy as np
import pytest

from noisytime import (
    DensityMatrix,
    GridMismatch,
    HermitianOperator,
    NotPositive,
    compare_to_analytic,
    correlated_model,
    dephasing_model,
    direct_damping_model,
    averaged_trajectory,
    eigendecompose,
    run_ensemble,
    unitary_from_phases,
)


class TestUnitaryFromPhases:
    def test_diagonal_hamiltonian(self, qubit):
        _, dec, _ = qubit
        chi = [0.3, 1.2]
        u = unitary_from_phases(dec, chi)
        assert np.allclose(u, np.diag(np.exp(-1j * np.array(chi))))

    def test_unitarity(self):
        rng = np.random.default_rng(4)
        raw = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        dec = eigendecompose(HermitianOperator(0.5 * (raw + raw.conj().T)))
        u = unitary_from_phases(dec, [0.1, 2.0, -0.7])
        assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-12)

    def test_wrong_length(self, qubit):
        _, dec, _ = qubit
        with pytest.raises(GridMismatch):
            unitary_from_phases(dec, [0.1, 0.2, 0.3])


class TestRunEnsemble:
    def test_reproducible(self, qubit):
        _, dec, rho0 = qubit
        grid = np.linspace(0, 1, 5)
        model = dephasing_model(0.5)
        a = run_ensemble(dec, model, rho0, grid, n_traj=300, seed=17)
        b = run_ensemble(dec, model, rho0, grid, n_traj=300, seed=17)
        assert np.array_equal(a.mean, b.mean)
        assert np.array_equal(a.stderr_re, b.stderr_re)
        c = run_ensemble(dec, model, rho0, grid, n_traj=300, seed=18)
        assert not np.array_equal(a.mean, c.mean)

    def test_worker_count_invariant(self, qubit):
        _, dec, rho0 = qubit
        grid = np.linspace(0, 1, 5)
        model = dephasing_model(0.5)
        serial = run_ensemble(dec, model, rho0, grid, n_traj=600, seed=9, n_workers=1)
        threaded = run_ensemble(dec, model, rho0, grid, n_traj=600, seed=9, n_workers=3)
        assert serial.mean.tobytes() == threaded.mean.tobytes()
        assert serial.stderr_im.tobytes() == threaded.stderr_im.tobytes()

    def test_initial_point_exact(self, qubit):
        _, dec, rho0 = qubit
        out = run_ensemble(dec, dephasing_model(1.0), rho0, [0.0, 0.5], n_traj=50, seed=2)
        assert np.max(np.abs(out.mean[0] - rho0.matrix)) < 1e-15

    def test_stderr_scales_with_n(self, qubit):
        _, dec, rho0 = qubit
        grid = np.linspace(0, 2, 4)
        model = dephasing_model(0.5)
        small = run_ensemble(dec, model, rho0, grid, n_traj=500, seed=5)
        large = run_ensemble(dec, model, rho0, grid, n_traj=8000, seed=5)
        ratio = np.max(small.stderr_re) / np.max(large.stderr_re)
        assert 2.5 < ratio < 6.5  # expect 4 from the 16x trajectory count

    def test_grid_must_start_at_zero(self, qubit):
        _, dec, rho0 = qubit
        with pytest.raises(GridMismatch):
            run_ensemble(dec, dephasing_model(1.0), rho0, [0.5, 1.0], n_traj=10, seed=1)

    def test_rejects_direct_model(self, qubit):
        _, dec, rho0 = qubit
        model = direct_damping_model([0.0, 1.0], [[0.1, 0.0], [0.0, 0.1]])
        with pytest.raises(ValueError):
            run_ensemble(dec, model, rho0, [0.0, 1.0], n_traj=10, seed=1)

    def test_validates_raw_state(self, qubit):
        _, dec, _ = qubit
        with pytest.raises(NotPositive):
            run_ensemble(
                dec, dephasing_model(1.0), np.diag([1.5, -0.5]), [0.0, 1.0], n_traj=10, seed=1
            )

    def test_as_result_provenance(self, qubit):
        _, dec, rho0 = qubit
        out = run_ensemble(dec, dephasing_model(1.0), rho0, [0.0, 1.0], n_traj=20, seed=3)
        assert out.as_result().provenance == "montecarlo"


class TestCompare:
    def test_passes_on_matching_model(self, qubit):
        _, dec, rho0 = qubit
        grid = np.linspace(0, 2, 6)
        model = dephasing_model(0.5)
        ensemble = run_ensemble(dec, model, rho0, grid, n_traj=4000, seed=90125)
        analytic = averaged_trajectory(dec, model, rho0, grid)
        report = compare_to_analytic(ensemble, analytic)
        assert report.passed is True
        assert report.max_z <= 4.0

    def test_fails_on_wrong_model(self, qubit):
        _, dec, rho0 = qubit
        grid = np.linspace(0, 2, 6)
        ensemble = run_ensemble(dec, dephasing_model(0.5), rho0, grid, n_traj=4000, seed=90125)
        wrong = averaged_trajectory(dec, dephasing_model(1.0), rho0, grid)
        report = compare_to_analytic(ensemble, wrong)
        assert report.passed is False
        assert report.max_z > 4.0

    def test_frozen_entries_do_not_inflate_z(self, four_level):
        # populations are deterministic: rounding-level deviation over
        # rounding-level stderr must not register as disagreement
        _, dec, rho0 = four_level
        grid = np.linspace(0, 1.5, 4)
        model = correlated_model(0.8, 1.0)
        ensemble = run_ensemble(dec, model, rho0, grid, n_traj=2000, seed=44)
        report = compare_to_analytic(ensemble, averaged_trajectory(dec, model, rho0, grid))
        assert report.passed is True

    def test_insufficient_trajectories(self, qubit):
        _, dec, rho0 = qubit
        grid = [0.0, 1.0]
        model = dephasing_model(0.5)
        ensemble = run_ensemble(dec, model, rho0, grid, n_traj=1, seed=1)
        report = compare_to_analytic(ensemble, averaged_trajectory(dec, model, rho0, grid))
        assert report.passed is None
        assert "pass" not in report.to_dict()

    def test_grid_mismatch(self, qubit):
        _, dec, rho0 = qubit
        model = dephasing_model(0.5)
        ensemble = run_ensemble(dec, model, rho0, [0.0, 1.0], n_traj=10, seed=1)
        other = averaged_trajectory(dec, model, rho0, [0.0, 2.0])
        with pytest.raises(GridMismatch):
            compare_to_analytic(ensemble, other)

    def test_accepts_state_list(self, qubit):
        _, dec, rho0 = qubit
        model = dephasing_model(0.5)
        grid = [0.0, 1.0]
        ensemble = run_ensemble(dec, model, rho0, grid, n_traj=500, seed=6)
        states = averaged_trajectory(dec, model, rho0, grid).states
        report = compare_to_analytic(ensemble, list(states))
        assert report.passed is True

    def test_to_dict_fields(self, qubit):
        _, dec, rho0 = qubit
        model = dephasing_model(0.5)
        grid = [0.0, 1.0]
        ensemble = run_ensemble(dec, model, rho0, grid, n_traj=100, seed=6)
        payload = compare_to_analytic(ensemble, averaged_trajectory(dec, model, rho0, grid)).to_dict()
        assert payload["n_traj"] == 100
        assert payload["thresholds"] == {"max_z": 4.0, "tail_z": 3.0, "tail_fraction": 0.05}
        assert len(payload["per_time"]) == 2
