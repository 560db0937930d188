import numpy as np
import pytest

import oracles
from permqubo import (
    HamiltonianPair,
    QapInstance,
    SizeCapError,
    SpinModel,
    build_baseline,
    build_formulation,
    build_hamiltonians,
    build_row_wise,
    gap_profile,
    interpolated_hamiltonian,
    spectral_gap,
    to_spin,
    two_lowest_eigenvalues,
)
from permqubo.qubo import enumerate_states


def random_instance(n, seed):
    rng = np.random.default_rng(seed)
    m = n * n
    return QapInstance(n, rng.uniform(-1, 1, (m, m)), rng.uniform(-1, 1, m))


def random_spin_model(m, seed):
    rng = np.random.default_rng(seed)
    Q = rng.normal(size=(m, m))
    Q = (Q + Q.T) / 2
    np.fill_diagonal(Q, 0.0)
    return SpinModel(Q_s=Q, q_s=rng.normal(size=m), offset_s=float(rng.normal()))


class TestProblemHamiltonian:
    def test_single_qubit_bias(self):
        pair = build_hamiltonians(SpinModel(Q_s=np.zeros((1, 1)), q_s=[1.0], offset_s=0.0))
        assert pair.problem_diagonal.tolist() == [-1.0, 1.0]

    def test_two_qubit_parity(self):
        pair = build_hamiltonians(
            SpinModel(Q_s=[[0.0, 0.5], [0.5, 0.0]], q_s=[0.0, 0.0], offset_s=0.0)
        )
        assert pair.problem_diagonal.tolist() == [1.0, -1.0, -1.0, 1.0]

    def test_diagonal_matches_spin_enumeration(self):
        inst = random_instance(3, 61)
        spin = to_spin(build_row_wise(inst))
        pair = build_hamiltonians(spin)
        spins = 2.0 * enumerate_states(9) - 1.0
        energies = np.array([spin.energy(s) for s in spins[:64]])
        assert np.allclose(pair.problem_diagonal[:64], energies, rtol=1e-12, atol=1e-12)
        assert pair.problem_diagonal.min() == pytest.approx(spin.energies(spins).min(), rel=1e-12)

    def test_qubit_cap(self):
        with pytest.raises(SizeCapError):
            build_hamiltonians(SpinModel(Q_s=np.zeros((17, 17)), q_s=np.zeros(17), offset_s=0.0))


class TestInterpolatedOperator:
    def test_mixer_ground_state(self):
        pair = build_hamiltonians(SpinModel(Q_s=np.zeros((3, 3)), q_s=np.zeros(3), offset_s=0.0))
        v = np.full(8, 1 / np.sqrt(8))
        assert np.allclose(pair.apply_mixer(v), -3.0 * v)

    def test_u0_is_pure_mixer(self):
        pair = build_hamiltonians(random_spin_model(3, 1))
        v = np.full(8, 1 / np.sqrt(8))
        op = interpolated_hamiltonian(pair, 0.0)
        assert np.allclose(op @ v, -3.0 * v)

    def test_u1_scales_basis_states(self):
        pair = build_hamiltonians(random_spin_model(2, 2))
        op = interpolated_hamiltonian(pair, 1.0)
        for z in range(4):
            e = np.zeros(4)
            e[z] = 1.0
            assert np.allclose(op @ e, pair.problem_diagonal[z] * e)

    def test_u_out_of_range(self):
        pair = build_hamiltonians(random_spin_model(2, 3))
        with pytest.raises(ValueError):
            interpolated_hamiltonian(pair, 1.5)
        with pytest.raises(ValueError):
            two_lowest_eigenvalues(pair, -0.1)

    def test_hermiticity(self):
        pair = build_hamiltonians(random_spin_model(5, 4))
        rng = np.random.default_rng(5)
        for u in (0.0, 0.3, 0.8, 1.0):
            v = rng.normal(size=32)
            w = rng.normal(size=32)
            lhs = np.dot(v, pair.apply(u, w))
            rhs = np.dot(pair.apply(u, v), w)
            assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_half_sigma_x_spectrum(self):
        pair = HamiltonianPair(1, np.zeros(2))
        e0, e1 = two_lowest_eigenvalues(pair, 0.5)
        assert e0 == pytest.approx(-0.5, abs=1e-10)
        assert e1 == pytest.approx(0.5, abs=1e-10)


class TestTwoLowest:
    def test_matches_dense_diagonalization(self):
        rng = np.random.default_rng(6)
        for trial in range(10):
            m = int(rng.integers(5, 9))
            pair = build_hamiltonians(random_spin_model(m, 100 + trial))
            u = float(rng.uniform(0, 1))
            e0, e1 = two_lowest_eigenvalues(pair, u)
            dense = np.linalg.eigvalsh(oracles.dense_hamiltonian(pair, u))
            assert e0 == pytest.approx(dense[0], abs=1e-8)
            assert e1 == pytest.approx(dense[1], abs=1e-8)

    def test_degenerate_diagonal_at_u1(self):
        pair = HamiltonianPair(2, np.array([0.5, 0.5, 1.0, 2.0]))
        e0, e1 = two_lowest_eigenvalues(pair, 1.0)
        assert e0 == e1 == 0.5


class TestGapProfile:
    def test_endpoint_gap_at_u0(self):
        pair = build_hamiltonians(random_spin_model(4, 7))
        e0, e1 = two_lowest_eigenvalues(pair, 0.0)
        assert e1 - e0 == pytest.approx(2.0, abs=1e-8)

    def test_degenerate_optimum_reports_zero_gap(self):
        inst = QapInstance(2, np.zeros((4, 4)), np.zeros(4))
        pair = build_hamiltonians(to_spin(build_baseline(inst)))
        with pytest.warns(UserWarning):
            profile = spectral_gap(pair, num_samples=5)
        assert profile.gaps()[-1] == 0.0  # both permutations share the ground energy

    def test_profile_invariants(self):
        inst = random_instance(3, 62)
        profile = gap_profile(build_formulation(inst, "inserted"), num_samples=17)
        assert np.all(profile.e1 >= profile.e0)
        assert profile.min_gap >= 0
        assert 0.0 <= profile.argmin_t <= 1.0
        assert profile.min_gap == pytest.approx(profile.gaps().min())

    def test_refinement_stability(self):
        inst = random_instance(3, 63)
        model = build_formulation(inst, "inserted")
        coarse = gap_profile(model, num_samples=33)
        fine = gap_profile(model, num_samples=65)
        assert abs(fine.min_gap - coarse.min_gap) < 0.05 * coarse.min_gap

    def test_gap_shrinks_with_penalty_scale(self):
        inst = random_instance(3, 64)
        for form in ("baseline", "row_wise", "inserted"):
            g1 = gap_profile(build_formulation(inst, form, 1.0), num_samples=17).min_gap
            g3 = gap_profile(build_formulation(inst, form, 3.0), num_samples=17).min_gap
            assert g3 < g1, form

    def test_num_samples_validation(self):
        pair = build_hamiltonians(random_spin_model(2, 8))
        with pytest.raises(ValueError):
            spectral_gap(pair, num_samples=1)

    def test_csv_and_summary_outputs(self, tmp_path):
        inst = random_instance(2, 65)
        profile = gap_profile(build_baseline(inst), num_samples=9)
        csv_path = tmp_path / "profile.csv"
        profile.to_csv(csv_path)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "u,e0,e1,gap"
        assert len(lines) == 10
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[3]) == pytest.approx(2.0, abs=1e-8)
        summary_path = tmp_path / "summary.json"
        profile.save_summary(summary_path, formulation="baseline", scale=1.0)
        import json

        data = json.loads(summary_path.read_text())
        assert data["min_gap"] == profile.min_gap
        assert data["formulation"] == "baseline"
