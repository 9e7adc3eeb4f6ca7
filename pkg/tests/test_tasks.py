import math
import warnings

import numpy as np
import pytest

import waverc.tasks as tasks_mod
from waverc.encoding import random_input
from waverc.medium import MediumConfig
from waverc.metrics import nmse, nmse_var
from waverc.readout import predict, train_ridge
from waverc.tasks import (MnistResult, TargetDivergedError, TaskSpec,
                          narma2_series, narma10_series, run_mnist_task,
                          run_prediction_task, run_stm_task,
                          second_order_series, stm_task_spec, stm_targets)

# ---------------------------------------------------------------------------
# independent brute-force oracles, written against the recurrence definitions
# (same canonical ascending-order window sum; everything else restructured)


def oracle_second_order(u):
    u = list(u)
    d = []
    for k in range(len(u)):
        prev1 = d[k - 1] if k - 1 >= 0 else 0.0
        prev2 = d[k - 2] if k - 2 >= 0 else 0.0
        d.append(0.4 * prev1 + 0.4 * prev1 * prev2 + 0.6 * u[k] ** 3 + 0.1)
    return d


def oracle_narma2(u):
    u = [0.0] + list(u)  # shift so index k reads u[k-1]
    d = []
    for k in range(len(u) - 1):
        prev1 = d[k - 1] if k - 1 >= 0 else 0.0
        prev2 = d[k - 2] if k - 2 >= 0 else 0.0
        d.append(0.4 * prev1 + 0.4 * prev1 * prev2 + 0.6 * u[k] ** 3 + 0.1)
    return d


def oracle_narma10(u):
    u = list(u)
    d = []
    for k in range(len(u)):
        prev1 = d[k - 1] if k - 1 >= 0 else 0.0
        window = 0.0
        for j in range(max(k - 10, 0), k):  # ascending index order
            window += d[j]
        u1 = u[k - 1] if k - 1 >= 0 else 0.0
        u10 = u[k - 10] if k - 10 >= 0 else 0.0
        d.append(0.3 * prev1 + 0.05 * prev1 * window + 1.5 * u1 * u10 + 0.1)
    return d


PAIRS = [(second_order_series, oracle_second_order),
         (narma2_series, oracle_narma2),
         (narma10_series, oracle_narma10)]


class TestRecurrenceOracles:
    @pytest.mark.parametrize("impl,oracle", PAIRS,
                             ids=["second_order", "narma2", "narma10"])
    def test_bit_identical_to_oracle(self, impl, oracle):
        for seed in range(10):
            u = random_input(5000, seed=seed)
            got = impl(u)
            want = oracle(u.values)
            assert got.tolist() == want

    def test_second_order_fixed_point_under_zero_input(self):
        # oracle: d* solves 0.4 d^2 - 0.6 d + 0.1 = 0 (smaller root)
        d_star = (0.6 - math.sqrt(0.36 - 0.16)) / 0.8
        assert d_star == pytest.approx(0.19098300562505255, abs=1e-14)
        series = second_order_series(np.zeros(500))
        assert series[-1] == pytest.approx(d_star, abs=1e-12)

    def test_narma2_fixed_point_under_zero_input(self):
        d_star = (0.6 - math.sqrt(0.36 - 0.16)) / 0.8
        series = narma2_series(np.zeros(500))
        assert series[-1] == pytest.approx(d_star, abs=1e-12)

    def test_narma10_fixed_point_under_zero_input(self):
        # oracle: d* solves 0.5 d^2 - 0.7 d + 0.1 = 0 (smaller root)
        d_star = 0.7 - math.sqrt(0.49 - 0.2)
        assert d_star == pytest.approx(0.16148351928655, abs=1e-12)
        series = narma10_series(np.zeros(800))
        assert series[-1] == pytest.approx(d_star, abs=1e-12)

    def test_second_order_first_step_hand_evaluation(self):
        # zero history, first input 0.5: d = 0.6 * 0.125 + 0.1 = 0.175
        series = second_order_series(np.array([0.5]))
        assert series[0] == pytest.approx(0.175, abs=1e-15)

    def test_narma2_first_step_is_loose_constant(self):
        series = narma2_series(np.array([0.5]))
        assert series[0] == pytest.approx(0.1, abs=1e-15)

    def test_narma10_first_step_is_loose_constant(self):
        series = narma10_series(np.array([0.5, 0.5]))
        assert series[0] == pytest.approx(0.1, abs=1e-15)

    @pytest.mark.parametrize("impl", [second_order_series, narma2_series],
                             ids=["second_order", "narma2"])
    def test_low_order_targets_stay_in_unit_interval(self, impl):
        for seed in range(25):
            series = impl(random_input(2000, seed=seed))
            assert series.min() >= 0.0
            assert series.max() <= 1.0

    def test_narma10_targets_stay_bounded(self):
        for seed in range(25):
            try:
                series = narma10_series(random_input(2000, seed=seed))
            except TargetDivergedError:
                continue  # rare instability is an error, never silent NaN
            assert np.all(np.isfinite(series))
            assert series.min() >= 0.0
            assert series.max() <= 2.0

    def test_narma10_divergence_raises_with_seed(self):
        # constant u = 0.5 has no fixed point: 0.5 d^2 - 0.7 d + 0.475 has
        # negative discriminant, so the recurrence must blow up
        from waverc.encoding import InputSeries
        u = InputSeries(values=np.full(4000, 0.5), seed=777)
        with pytest.raises(TargetDivergedError, match="777"):
            narma10_series(u)


class TestStmTargets:
    def test_zero_delay_is_identity(self):
        u = np.array([0.1, 0.2, 0.3])
        assert stm_targets(u, 0).tolist() == [0.1, 0.2, 0.3]

    def test_unit_delay_shifts_and_pads(self):
        u = np.array([1.0, 2.0, 3.0])
        assert stm_targets(u, 1).tolist() == [0.0, 1.0, 2.0]

    def test_delay_beyond_length_gives_zeros(self):
        u = np.array([1.0, 2.0, 3.0])
        assert not stm_targets(u, 5).any()

    def test_negative_delay_rejected(self):
        with pytest.raises(ValueError, match="tau"):
            stm_targets(np.zeros(3), -1)


class TestTaskSpec:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            TaskSpec(kind="mackey_glass")

    def test_totals(self):
        spec = TaskSpec()
        assert spec.total_steps == 5000
        assert stm_task_spec().total_steps == 5000


class TestReadoutShortcuts:
    def test_perfect_oracle_column_reaches_zero_error(self, rng):
        # a state matrix whose first column *is* the target can be copied
        d = rng.uniform(0.1, 1.0, 400)
        X = np.column_stack([d, rng.standard_normal((400, 5))])
        model = train_ridge(X[:300], d[:300], 0.0)
        y = predict(model, X[300:])
        assert nmse(d[300:], y) < 1e-20

    def test_pure_noise_states_score_unit_nmse_var(self):
        gen = np.random.default_rng(5)
        d = oracle_narma2(gen.uniform(0, 0.5, 2500))
        d = np.asarray(d)
        X = gen.standard_normal((2500, 30))
        model = train_ridge(X[:2000], d[:2000], 1e-6)
        y = predict(model, X[2000:])
        assert nmse_var(d[2000:], y) == pytest.approx(1.0, abs=0.15)


def small_medium():
    return MediumConfig(lattice_len=32, exciter_ports=(12, 20),
                        detector_ports=(14, 18))


def small_spec(**kw):
    values = dict(kind="narma2", washout=150, train_len=500, test_len=150,
                  interval=0.5, nodes_per_input_step=10)
    values.update(kw)
    return TaskSpec(**values)


class TestRunPredictionTask:
    def test_reports_all_error_metrics(self):
        report = run_prediction_task(small_spec(seed=1), small_medium())
        assert report.kind == "narma2"
        assert report.nodes == 20
        for value in (report.nmse_train, report.nmse_test,
                      report.nmse_var_train, report.nmse_var_test):
            assert value is not None and np.isfinite(value) and value >= 0
        assert report.nmse_var_test < 1.0  # better than the mean predictor

    def test_field_override_lands_in_report(self):
        report = run_prediction_task(small_spec(seed=1, field=0.1),
                                     small_medium())
        assert report.field == 0.1

    def test_deterministic_given_seed(self):
        a = run_prediction_task(small_spec(seed=4), small_medium())
        b = run_prediction_task(small_spec(seed=4), small_medium())
        assert a.nmse_test == b.nmse_test

    def test_stm_kind_rejected(self):
        with pytest.raises(ValueError, match="prediction"):
            run_prediction_task(small_spec(kind="stm_delay"), small_medium())

    def test_divergent_seed_regenerates(self, monkeypatch, caplog):
        calls = {"n": 0}
        real = tasks_mod.narma10_series

        def flaky(u):
            calls["n"] += 1
            if calls["n"] == 1:
                raise TargetDivergedError("narma10", 10, u.seed)
            return real(u)

        monkeypatch.setitem(tasks_mod._GENERATORS, "narma10", flaky)
        report = run_prediction_task(small_spec(kind="narma10", seed=9),
                                     small_medium())
        assert calls["n"] == 2
        assert report.seed == 9  # the cell key keeps the requested seed


class TestRunStmTask:
    def test_curve_and_capacity(self):
        spec = stm_task_spec(washout=150, train_len=600, test_len=250,
                             interval=2.5, nodes_per_input_step=10, tau_max=8,
                             seed=2)
        report = run_stm_task(spec, small_medium())
        assert report.forgetting_curve.shape == (8,)
        assert np.all((report.forgetting_curve >= 0)
                      & (report.forgetting_curve <= 1))
        assert report.c_stm == pytest.approx(report.forgetting_curve.sum())
        assert report.forgetting_curve[0] > 0.5  # recalls the last input


class TestRunMnistTask:
    def make_images(self, labels):
        # one distinctive block per class
        images = np.zeros((len(labels), 28, 28), dtype=np.uint8)
        for i, lab in enumerate(labels):
            images[i, lab:lab + 3, lab:lab + 3] = 255
        return images

    def test_ten_distinct_digits_interpolate_perfectly(self):
        labels = np.arange(10, dtype=np.uint8)
        images = self.make_images(labels)
        result = run_mnist_task(images, labels, images, labels,
                                medium=small_medium())
        assert result.accuracy_train == 1.0
        assert result.accuracy_test == 1.0
        assert result.n_features == 196

    def test_all_zero_images_fall_back_to_majority_class(self):
        labels = np.array([3, 3, 3, 5, 7, 7], dtype=np.uint8)
        images = np.zeros((6, 28, 28), dtype=np.uint8)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            result = run_mnist_task(images, labels, images, labels,
                                    medium=small_medium())
        assert result.accuracy_test == pytest.approx(np.mean(labels == 3))

    def test_size_curve_uses_prefixes(self):
        labels = np.array([0, 1, 2, 3, 4, 5, 6, 7, 8, 9] * 2, dtype=np.uint8)
        images = self.make_images(labels)
        result = run_mnist_task(images, labels, images[:5], labels[:5],
                                medium=small_medium(), sizes=[10, 20])
        assert [n for n, _ in result.size_curve] == [10, 20]
        assert isinstance(result, MnistResult)

    def test_oversized_curve_size_rejected(self):
        labels = np.arange(10, dtype=np.uint8)
        images = self.make_images(labels)
        with pytest.raises(ValueError, match="exceeds"):
            run_mnist_task(images, labels, images, labels,
                           medium=small_medium(), sizes=[50])
