import numpy as np
import pytest

from waverc.lyapunov import (EmbeddingSpec, UnreliableEstimateError, embed,
                             estimate_jacobian, lyapunov_spectrum,
                             phase_portrait, qr_treadmill,
                             save_convergence_csv, save_phase_portrait_csv)


def logistic_series(n, x0=0.2345, r=4.0):
    out = np.empty(n)
    x = x0
    for i in range(n):
        x = r * x * (1.0 - x)
        out[i] = x
    return out


class TestEmbed:
    def test_dimension_one_returns_series(self):
        series = np.arange(20.0)
        points = embed(series, EmbeddingSpec(dimension=1))
        assert points.shape == (20, 1)
        assert np.array_equal(points[:, 0], series)

    def test_dimension_two_lag_one(self):
        points = embed(np.array([1.0, 2.0, 3.0]),
                       EmbeddingSpec(dimension=2, lag=1, min_neighbors=3,
                                     max_neighbors=3))
        assert points.tolist() == [[1.0, 2.0], [2.0, 3.0]]

    def test_vector_count_for_lagged_embedding(self):
        # length 10, m = 3, lag = 2 -> 10 - (3-1)*2 = 6 vectors
        points = embed(np.arange(10.0),
                       EmbeddingSpec(dimension=3, lag=2, min_neighbors=4,
                                     max_neighbors=4))
        assert points.shape == (6, 3)

    def test_too_short_series_names_required_length(self):
        spec = EmbeddingSpec(dimension=4, lag=3)
        with pytest.raises(ValueError, match="at least 10"):
            embed(np.arange(8.0), spec)

    def test_spectrum_requires_neighbor_headroom(self):
        spec = EmbeddingSpec(dimension=2, lag=1)
        with pytest.raises(ValueError, match=str(spec.required_length())):
            lyapunov_spectrum(np.arange(6.0), spec)

    def test_spec_validation(self):
        with pytest.raises(ValueError, match="dimension"):
            EmbeddingSpec(dimension=0)
        with pytest.raises(ValueError, match="epsilon"):
            EmbeddingSpec(epsilon=1.5)
        with pytest.raises(ValueError, match="min_neighbors"):
            EmbeddingSpec(dimension=3, min_neighbors=2)


class TestEstimateJacobian:
    def test_linear_contraction_recovered(self):
        # x(t+1) = 0.5 x(t): every displacement pair gives exactly 0.5
        series = 0.5 ** np.arange(60.0)
        points = embed(series, EmbeddingSpec(dimension=1))
        est = estimate_jacobian(points, 25, EmbeddingSpec(dimension=1))
        assert est is not None
        assert est.jacobian[0, 0] == pytest.approx(0.5, abs=1e-6)
        assert est.residual < 1e-12

    def test_two_cycle_return_map_is_identity(self):
        # period-2 orbit with s=2: neighbours from the opposite phase map
        # back with slope exactly 1 (same-phase duplicates carry no
        # information and are excluded)
        series = np.tile([0.25, 0.75], 40)
        spec = EmbeddingSpec(dimension=1, evolution_steps=2, epsilon=0.5,
                             min_neighbors=2)
        points = embed(series, spec)
        est = estimate_jacobian(points, 10, spec)
        assert est is not None
        assert est.jacobian[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_constant_series_is_skipped(self):
        series = np.full(50, 3.3)
        spec = EmbeddingSpec(dimension=1)
        points = embed(series, spec)
        assert estimate_jacobian(points, 10, spec) is None

    def test_out_of_range_t_rejected(self):
        points = embed(np.arange(10.0), EmbeddingSpec(dimension=1))
        with pytest.raises(ValueError, match="evolve"):
            estimate_jacobian(points, 9, EmbeddingSpec(dimension=1))


class TestQrTreadmill:
    def test_diagonal_system_is_exact(self):
        # for diagonal Jacobians Q stays the identity and R reproduces the
        # diagonal exactly, so log products match singular value growth
        J = np.diag([0.9, 0.5])
        logs = qr_treadmill([J] * 40)
        assert logs.shape == (40, 2)
        assert np.allclose(logs[:, 0], np.log(0.9), atol=1e-15)
        assert np.allclose(logs[:, 1], np.log(0.5), atol=1e-15)

    def test_rotated_symmetric_system_window_product(self):
        # after alignment the R-diagonal products track the singular-value
        # growth of the propagated Jacobian product to 1e-6
        theta = 0.7
        rot = np.array([[np.cos(theta), -np.sin(theta)],
                        [np.sin(theta), np.cos(theta)]])
        A = rot @ np.diag([0.9, 0.4]) @ rot.T
        logs = qr_treadmill([A] * 80)
        window = logs[40:80]
        growth = window.sum(axis=0)
        expected = 40 * np.log(np.array([0.9, 0.4]))
        assert np.allclose(growth, expected, atol=1e-6)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="no Jacobians"):
            qr_treadmill([])


class TestLyapunovSpectrum:
    def test_logistic_map_reaches_ln_two(self):
        series = logistic_series(40_000)
        result = lyapunov_spectrum(series, EmbeddingSpec(dimension=1,
                                                         max_iterations=12_000))
        assert result.exponents[0] == pytest.approx(np.log(2.0), abs=0.02)
        assert result.skipped_fraction < 0.01
        assert result.neighbor_counts["min"] >= 3

    def test_damped_linear_map(self):
        series = 0.9 ** np.arange(200.0)
        result = lyapunov_spectrum(series, EmbeddingSpec(dimension=1))
        assert result.exponents[0] == pytest.approx(np.log(0.9), abs=0.01)

    def test_sample_dt_rescales(self):
        series = 0.9 ** np.arange(200.0)
        per_step = lyapunov_spectrum(series, EmbeddingSpec(dimension=1))
        scaled = lyapunov_spectrum(series, EmbeddingSpec(dimension=1),
                                   sample_dt=0.5)
        assert scaled.exponents[0] == pytest.approx(2 * per_step.exponents[0])

    def test_affine_invariance(self):
        series = logistic_series(8_000)
        spec = EmbeddingSpec(dimension=1, max_iterations=4_000)
        base = lyapunov_spectrum(series, spec).exponents[0]
        mapped = lyapunov_spectrum(2.5 * series - 1.0, spec).exponents[0]
        assert mapped == pytest.approx(base, abs=0.02)

    def test_exponents_sorted_descending(self):
        series = logistic_series(4_000) + 0.3 * np.sin(np.arange(4_000))
        result = lyapunov_spectrum(series,
                                   EmbeddingSpec(dimension=2,
                                                 max_iterations=1_000))
        assert result.exponents[0] >= result.exponents[1]
        assert result.convergence.shape[1] == 2
        assert result.convergence[-1, 0] == pytest.approx(result.exponents[0])

    def test_constant_series_unreliable(self):
        with pytest.raises(UnreliableEstimateError):
            lyapunov_spectrum(np.full(300, 1.0), EmbeddingSpec(dimension=1))


class TestPhasePortrait:
    def test_three_points(self):
        pairs = phase_portrait(np.array([1.0, 2.0, 3.0]), lag=1)
        assert pairs.tolist() == [[1.0, 2.0], [2.0, 3.0]]

    def test_constant_series_collapses_to_a_point(self):
        pairs = phase_portrait(np.full(10, 2.0), lag=2)
        assert np.all(pairs == 2.0)

    def test_sine_wave_traces_an_ellipse(self):
        # rotating by 45 degrees turns the delayed sinusoid into an axis-
        # aligned ellipse; normalised radii deviate from 1 by < 1 %
        t = np.arange(4000) * 0.1
        series = np.sin(t)
        lag = 7
        pairs = phase_portrait(series, lag=lag)
        u = (pairs[:, 0] + pairs[:, 1]) / np.sqrt(2)
        v = (pairs[:, 0] - pairs[:, 1]) / np.sqrt(2)
        ru = np.abs(u).max()
        rv = np.abs(v).max()
        radial = (u / ru) ** 2 + (v / rv) ** 2
        assert np.abs(radial - 1.0).max() < 0.01

    def test_short_series_rejected(self):
        with pytest.raises(ValueError, match="too short"):
            phase_portrait(np.array([1.0]), lag=1)


class TestCsvExports:
    def test_convergence_csv(self, tmp_path):
        series = logistic_series(3_000)
        result = lyapunov_spectrum(series, EmbeddingSpec(dimension=1,
                                                         max_iterations=500))
        path = tmp_path / "conv.csv"
        save_convergence_csv(path, result)
        lines = path.read_text().splitlines()
        assert lines[0] == "iteration,lambda_1"
        assert len(lines) == result.points_used + 1

    def test_phase_portrait_csv(self, tmp_path):
        pairs = phase_portrait(np.array([1.0, 2.0, 3.0]), lag=1)
        path = tmp_path / "portrait.csv"
        save_phase_portrait_csv(path, pairs)
        assert path.read_text().splitlines()[0] == "x,x_lagged"
