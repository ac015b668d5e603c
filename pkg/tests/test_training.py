"""Losses, optimizer, schedule, synthetic tasks, and the toy training loop."""

import math

import numpy as np
import pytest

from painformer import autodiff as ad
from painformer.autodiff import Tensor, finite_diff_grad, param
from painformer.errors import ContractError
from painformer.training import (
    AdamW,
    ScheduleConfig,
    SyntheticTaskSpec,
    TrainConfig,
    accuracy,
    apportion_batch,
    cosine_lr,
    default_loso_spec,
    default_toy_specs,
    dropout,
    droppath,
    label_smoothing_ce,
    loso_folds,
    macro_f1,
    macro_recall,
    make_synthetic_task,
    multitask_loss,
    nearest_centroid,
    run_loso,
    train_toy_multitask,
)


# ------------------------------------------------- label-smoothed cross-entropy

class TestLabelSmoothingCE:
    @pytest.mark.parametrize("k", [2, 3, 5])
    @pytest.mark.parametrize("eps", [0.0, 0.1, 0.5])
    def test_uniform_logits_give_log_k(self, k, eps):
        # any target distribution summing to 1 dotted with a constant vector
        # cancels, leaving exactly ln(k)
        logits = Tensor(np.full(k, 0.37))
        loss = label_smoothing_ce(logits, 1, eps)
        assert abs(float(loss.data) - math.log(k)) < 1e-12

    def test_hand_oracle_three_classes(self):
        logits = np.array([1.0, -0.5, 0.25])
        eps = 0.1
        q = np.array([eps / 2, eps / 2, 1.0 - eps])
        logprobs = logits - np.log(np.exp(logits).sum())
        want = -(q * logprobs).sum()
        got = float(label_smoothing_ce(Tensor(logits), 2, eps).data)
        assert abs(got - want) < 1e-12

    def test_batched_is_mean_of_singles(self):
        rng = np.random.default_rng(3)
        logits = rng.standard_normal((4, 5))
        targets = np.array([0, 3, 1, 4])
        singles = [float(label_smoothing_ce(Tensor(logits[i]), targets[i], 0.2).data)
                   for i in range(4)]
        batched = float(label_smoothing_ce(Tensor(logits), targets, 0.2).data)
        assert abs(batched - np.mean(singles)) < 1e-12

    def test_confident_correct_prediction_near_zero(self):
        logits = Tensor(np.array([30.0, 0.0, 0.0]))
        assert float(label_smoothing_ce(logits, 0, 0.0).data) < 1e-12

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        logits0 = rng.standard_normal((3, 4))
        targets = np.array([1, 0, 3])

        def f(x):
            return float(label_smoothing_ce(Tensor(x), targets, 0.1).data)

        t = param(logits0.copy())
        label_smoothing_ce(t, targets, 0.1).backward()
        fd = finite_diff_grad(f, logits0)
        np.testing.assert_allclose(t.grad, fd, rtol=1e-6, atol=1e-8)

    def test_contracts(self):
        with pytest.raises(ContractError):
            label_smoothing_ce(Tensor(np.zeros(3)), 0, 1.0)
        with pytest.raises(ContractError):
            label_smoothing_ce(Tensor(np.zeros(3)), 3, 0.1)
        with pytest.raises(ContractError):
            label_smoothing_ce(Tensor(np.zeros(1)), 0, 0.0)
        with pytest.raises(ContractError):
            label_smoothing_ce(Tensor(np.zeros((2, 3))), np.array([0]), 0.0)


# ------------------------------------------------------------ multi-task loss

class TestMultitaskLoss:
    def test_zero_weights_reduce_to_plain_sum(self):
        losses = Tensor(np.array([0.25, 0.5, 2.0]))
        w = param(np.zeros(3))
        total = multitask_loss(losses, w, "standard")
        assert float(total.data) == 0.25 + 0.5 + 2.0
        total_v = multitask_loss(losses, w, "verbatim")
        assert float(total_v.data) == 0.25 + 0.5 + 2.0

    def test_list_input_matches_vector_input(self):
        parts = [Tensor(np.asarray(v)) for v in (0.3, 1.1, 0.9)]
        vec = Tensor(np.array([0.3, 1.1, 0.9]))
        w = param(np.array([0.2, -0.4, 0.05]))
        a = float(multitask_loss(parts, w).data)
        b = float(multitask_loss(vec, w).data)
        assert abs(a - b) < 1e-15

    def test_standard_mode_stationary_point_is_log_loss(self):
        # minimizing sum exp(-w)L + w over w lands at w = ln(L)
        lvals = np.array([0.7, 2.0, 3.5])
        losses = Tensor(lvals)
        w = param(np.zeros(3))
        for _ in range(3000):
            total = multitask_loss(losses, w, "standard")
            total.backward()
            w.data = w.data - 0.1 * w.grad
        np.testing.assert_allclose(w.data, np.log(lvals), atol=1e-4)

    def test_verbatim_mode_value_oracle(self):
        lvals = np.array([0.7, 2.0])
        wvals = np.array([0.3, -0.2])
        want = float(np.sum(np.exp(wvals) * lvals + wvals))
        got = float(multitask_loss(Tensor(lvals), param(wvals.copy()), "verbatim").data)
        assert abs(got - want) < 1e-12

    def test_verbatim_mode_unbounded_below_in_w(self):
        # fidelity mode keeps the printed sign; pushing w down always helps
        lvals = Tensor(np.array([1.0, 1.0]))
        at_zero = float(multitask_loss(lvals, param(np.zeros(2)), "verbatim").data)
        at_low = float(multitask_loss(lvals, param(np.full(2, -10.0)), "verbatim").data)
        assert at_low < at_zero - 10

    @pytest.mark.parametrize("mode", ["standard", "verbatim"])
    def test_gradients_match_finite_differences(self, mode):
        lvals = np.array([0.7, 2.0, 3.5])
        wvals = np.array([0.3, -0.5, 0.1])

        losses = param(lvals.copy())
        w = param(wvals.copy())
        multitask_loss(losses, w, mode).backward()
        fd_l = finite_diff_grad(
            lambda x: float(multitask_loss(Tensor(x), Tensor(wvals), mode).data), lvals)
        fd_w = finite_diff_grad(
            lambda x: float(multitask_loss(Tensor(lvals), Tensor(x), mode).data), wvals)
        np.testing.assert_allclose(losses.grad, fd_l, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(w.grad, fd_w, rtol=1e-6, atol=1e-9)

    def test_contracts(self):
        with pytest.raises(ContractError):
            multitask_loss(Tensor(np.zeros(3)), param(np.zeros(2)))
        with pytest.raises(ContractError):
            multitask_loss(Tensor(np.zeros(3)), param(np.zeros(3)), "softmax")


# -------------------------------------------------------------------- AdamW

class TestAdamW:
    def test_first_step_hand_computation(self):
        lr, wd, eps = 0.1, 0.1, 1e-8
        p = param(np.array([1.0]))
        p.grad = np.array([0.5])
        opt = AdamW([p], lr=lr, weight_decay=wd, eps=eps)
        opt.step()
        m = 0.1 * 0.5
        v = 0.001 * 0.25
        mhat = m / 0.1
        vhat = v / 0.001
        want = 1.0 - lr * wd * 1.0 - lr * mhat / (math.sqrt(vhat) + eps)
        assert abs(float(p.data[0]) - want) < 1e-14

    def test_two_steps_match_reference_loop(self):
        rng = np.random.default_rng(5)
        p0 = rng.standard_normal(4)
        grads = [rng.standard_normal(4), rng.standard_normal(4)]
        lr, wd, b1, b2, eps = 0.01, 0.1, 0.9, 0.999, 1e-8

        ref = p0.copy()
        m = np.zeros(4)
        v = np.zeros(4)
        for t, g in enumerate(grads, start=1):
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            mhat = m / (1 - b1 ** t)
            vhat = v / (1 - b2 ** t)
            ref = ref - lr * wd * ref - lr * mhat / (np.sqrt(vhat) + eps)

        p = param(p0.copy())
        opt = AdamW([p], lr=lr, weight_decay=wd)
        for g in grads:
            p.grad = g.copy()
            opt.step()
        np.testing.assert_allclose(p.data, ref, rtol=0, atol=1e-15)

    def test_weight_decay_is_decoupled(self):
        # the decay term must be exactly -lr*wd*p regardless of the gradient
        p0 = np.array([2.0, -3.0])
        g = np.array([0.7, 0.1])
        lr, wd = 0.05, 0.2

        with_wd = param(p0.copy())
        with_wd.grad = g.copy()
        AdamW([with_wd], lr=lr, weight_decay=wd).step()

        without = param(p0.copy())
        without.grad = g.copy()
        AdamW([without], lr=lr, weight_decay=0.0).step()

        np.testing.assert_allclose(with_wd.data - without.data, -lr * wd * p0,
                                   rtol=0, atol=1e-15)

    def test_moments_match_parameter_shapes(self):
        shapes = [(3,), (2, 4), (2, 3, 5)]
        params = [param(np.zeros(s)) for s in shapes]
        opt = AdamW(params)
        assert [m.shape for m in opt.m] == shapes
        assert [v.shape for v in opt.v] == shapes

    def test_none_grad_leaves_parameter_untouched(self):
        p = param(np.array([1.0, 2.0]))
        q = param(np.array([3.0]))
        q.grad = np.array([1.0])
        opt = AdamW([p, q], lr=0.1, weight_decay=0.0)
        opt.step()
        np.testing.assert_array_equal(p.data, [1.0, 2.0])
        assert q.data[0] != 3.0

    def test_zero_grad_clears(self):
        p = param(np.ones(2))
        p.grad = np.ones(2)
        opt = AdamW([p])
        opt.zero_grad()
        assert p.grad is None

    def test_dict_input_accepted(self):
        p = param(np.ones(2))
        opt = AdamW({"w": p})
        assert opt.params == [p]


# ----------------------------------------------------------- cosine schedule

class TestCosineSchedule:
    CFG = ScheduleConfig(base_lr=1.0, total_steps=30, warmup_steps=10, cooldown_steps=10)

    def test_warmup_starts_at_zero(self):
        assert cosine_lr(0, self.CFG) == 0.0

    def test_warmup_is_linear(self):
        assert abs(cosine_lr(5, self.CFG) - 0.5) < 1e-15

    def test_first_cosine_step_is_base_lr(self):
        assert abs(cosine_lr(10, self.CFG) - 1.0) < 1e-15

    def test_cosine_midpoint_is_average_of_base_and_floor(self):
        floor = 0.01
        want = floor + (1.0 - floor) * 0.5
        assert abs(cosine_lr(15, self.CFG) - want) < 1e-15

    def test_cooldown_is_flat_at_floor(self):
        for step in range(20, 30):
            assert abs(cosine_lr(step, self.CFG) - 0.01) < 1e-15

    def test_no_warmup_starts_at_base(self):
        cfg = ScheduleConfig(base_lr=0.5, total_steps=10)
        assert cosine_lr(0, cfg) == 0.5

    def test_monotone_after_warmup(self):
        vals = [cosine_lr(s, self.CFG) for s in range(10, 30)]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_floor_scales_with_base_lr(self):
        cfg = ScheduleConfig(base_lr=3e-3, total_steps=20, warmup_steps=2, cooldown_steps=2)
        assert abs(cosine_lr(19, cfg) - 3e-5) < 1e-18

    def test_contracts(self):
        with pytest.raises(ContractError):
            cosine_lr(30, self.CFG)
        with pytest.raises(ContractError):
            cosine_lr(-1, self.CFG)
        with pytest.raises(ContractError):
            cosine_lr(0, ScheduleConfig(base_lr=1.0, total_steps=10,
                                        warmup_steps=6, cooldown_steps=4))


# ------------------------------------------------------- dropout and droppath

class TestRegularizers:
    def test_eval_mode_returns_same_object(self):
        x = Tensor(np.ones((4, 4)))
        assert dropout(x, 0.5, training=False) is x
        assert droppath(x, 0.5, training=False) is x

    def test_rate_zero_returns_same_object(self):
        x = Tensor(np.ones((4, 4)))
        rng = np.random.default_rng(0)
        assert dropout(x, 0.0, rng, training=True) is x
        assert droppath(x, 0.0, rng, training=True) is x

    def test_dropout_values_are_zero_or_rescaled(self):
        rng = np.random.default_rng(9)
        x = Tensor(np.full((50, 50), 2.0))
        y = dropout(x, 0.25, rng).data
        assert set(np.round(np.unique(y), 10)) <= {0.0, round(2.0 / 0.75, 10)}
        dropped = float(np.mean(y == 0.0))
        assert 0.15 < dropped < 0.35

    def test_droppath_acts_per_sample(self):
        rng = np.random.default_rng(4)
        x = Tensor(np.ones((64, 3, 5)))
        y = droppath(x, 0.5, rng).data
        per_row = y.reshape(64, -1)
        for row in per_row:
            assert np.all(row == row[0])
        kept = float(np.mean(per_row[:, 0] > 0))
        assert 0.3 < kept < 0.7

    def test_gradient_masked_like_forward(self):
        rng = np.random.default_rng(2)
        x = param(np.ones((10, 10)))
        y = dropout(x, 0.4, rng)
        y.sum().backward()
        np.testing.assert_allclose(x.grad, y.data, rtol=0, atol=0)

    def test_contracts(self):
        x = Tensor(np.ones(3))
        with pytest.raises(ContractError):
            dropout(x, 1.0, np.random.default_rng(0))
        with pytest.raises(ContractError):
            droppath(x, -0.1, np.random.default_rng(0))
        with pytest.raises(ContractError):
            dropout(x, 0.5, None, training=True)


# ------------------------------------------------------------------- metrics

class TestMetrics:
    Y_TRUE = np.array([0, 0, 1, 1, 2, 2])
    Y_PRED = np.array([0, 1, 1, 1, 2, 0])

    def test_accuracy_hand_oracle(self):
        assert abs(accuracy(self.Y_TRUE, self.Y_PRED) - 4 / 6) < 1e-15

    def test_macro_recall_hand_oracle(self):
        # recalls: 1/2, 1, 1/2
        assert abs(macro_recall(self.Y_TRUE, self.Y_PRED, 3) - 2 / 3) < 1e-12

    def test_macro_f1_hand_oracle(self):
        # f1 per class: 1/2, 4/5, 2/3 -> mean 59/90
        assert abs(macro_f1(self.Y_TRUE, self.Y_PRED, 3) - 59 / 90) < 1e-12

    def test_absent_class_counts_as_zero(self):
        got = macro_recall(self.Y_TRUE, self.Y_PRED, 4)
        assert abs(got - (2 / 3) * 3 / 4) < 1e-12

    def test_perfect_predictions(self):
        y = np.array([0, 1, 2, 1])
        assert accuracy(y, y) == 1.0
        assert macro_recall(y, y, 3) == 1.0
        assert macro_f1(y, y, 3) == 1.0

    def test_contracts(self):
        with pytest.raises(ContractError):
            accuracy(np.array([0, 1]), np.array([0]))
        with pytest.raises(ContractError):
            accuracy(np.array([]), np.array([]))


# ----------------------------------------------------------- synthetic tasks

class TestSyntheticTasks:
    def test_deterministic_in_spec_and_seed(self):
        spec = SyntheticTaskSpec("a", classes=3, subjects=4, samples_per_subject=6,
                                 image=False, dim=16)
        t1 = make_synthetic_task(spec, seed=5)
        t2 = make_synthetic_task(spec, seed=5)
        np.testing.assert_array_equal(t1.x, t2.x)
        np.testing.assert_array_equal(t1.y, t2.y)
        np.testing.assert_array_equal(t1.train_idx, t2.train_idx)

    def test_seed_changes_data(self):
        spec = SyntheticTaskSpec("a", image=False, dim=16)
        t1 = make_synthetic_task(spec, seed=5)
        t2 = make_synthetic_task(spec, seed=6)
        assert not np.array_equal(t1.x, t2.x)

    def test_class_means_sit_separation_apart(self):
        # with subject noise off, empirical class means concentrate around
        # centers exactly `separation` apart in every pair
        spec = SyntheticTaskSpec("sep", classes=3, subjects=40, samples_per_subject=30,
                                 separation=6.0, image=False, dim=64, subject_std=0.0)
        task = make_synthetic_task(spec, seed=1)
        means = np.stack([task.x[task.y == c].mean(axis=0) for c in range(3)])
        for i in range(3):
            for j in range(i + 1, 3):
                dist = float(np.linalg.norm(means[i] - means[j]))
                assert abs(dist - 6.0) < 0.5, (i, j, dist)

    def test_labels_balanced_and_subjects_complete(self):
        spec = SyntheticTaskSpec("b", classes=3, subjects=5, samples_per_subject=21,
                                 image=False, dim=8)
        task = make_synthetic_task(spec, seed=2)
        counts = np.bincount(task.y, minlength=3)
        assert set(counts.tolist()) == {35}
        subj_counts = np.bincount(task.subject, minlength=5)
        assert set(subj_counts.tolist()) == {21}

    def test_image_mode_shape(self):
        spec = SyntheticTaskSpec("img", classes=2, subjects=2, samples_per_subject=4)
        task = make_synthetic_task(spec, seed=0)
        assert task.x.shape == (8, 32, 32, 3)
        assert task.x.dtype == np.float32

    def test_image_class_means_sit_separation_apart(self):
        spec = SyntheticTaskSpec("isep", classes=3, subjects=40, samples_per_subject=30,
                                 separation=4.0, subject_std=0.0)
        task = make_synthetic_task(spec, seed=1)
        flat = task.x.reshape(len(task.x), -1)
        means = np.stack([flat[task.y == c].mean(axis=0) for c in range(3)])
        for i in range(3):
            for j in range(i + 1, 3):
                dist = float(np.linalg.norm(means[i] - means[j]))
                assert abs(dist - 4.0) < 0.4, (i, j, dist)

    def test_image_class_content_is_spatially_smooth(self):
        # class-mean images must be low frequency: adjacent-pixel differences
        # stay far below what white-noise content would produce
        spec = SyntheticTaskSpec("smooth", classes=2, subjects=20, samples_per_subject=40,
                                 subject_std=0.0)
        task = make_synthetic_task(spec, seed=4)
        m0 = task.x[task.y == 0].mean(axis=0)
        m1 = task.x[task.y == 1].mean(axis=0)
        diff = (m0 - m1).astype(np.float64)
        drow = np.diff(diff, axis=0)
        ratio = float(np.var(drow) / np.var(diff))
        assert ratio < 0.5, ratio     # white noise content would sit near 2.0

    def test_image_centroid_ceiling_above_95_percent(self):
        # two classes at separation 4.0 must stay genuinely separable by the
        # plainest possible classifier
        spec = SyntheticTaskSpec("ceiling", classes=2, subjects=10, samples_per_subject=30)
        task = make_synthetic_task(spec, seed=7)
        flat = task.x.reshape(len(task.x), -1)
        tr, ev = task.train_idx, task.eval_idx
        preds = nearest_centroid(flat[tr], task.y[tr], flat[ev], 2)
        assert accuracy(task.y[ev], preds) > 0.95

    def test_split_partitions_all_samples(self):
        spec = SyntheticTaskSpec("c", classes=2, subjects=5, samples_per_subject=8,
                                 image=False, dim=8, eval_fraction=0.25)
        task = make_synthetic_task(spec, seed=3)
        both = np.concatenate([task.train_idx, task.eval_idx])
        assert np.array_equal(np.sort(both), np.arange(40))
        assert task.eval_idx.size == 10

    def test_contracts(self):
        with pytest.raises(ContractError):
            make_synthetic_task(SyntheticTaskSpec("d", classes=9, image=False, dim=4), 0)
        with pytest.raises(ContractError):
            make_synthetic_task(SyntheticTaskSpec("e", eval_fraction=1.5), 0)


# ------------------------------------------------------- batch apportionment

class TestApportionBatch:
    def test_exact_proportions(self):
        assert apportion_batch([100, 100, 200], 8) == [2, 2, 4]

    def test_sums_to_total_with_min_one(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            k = int(rng.integers(1, 6))
            sizes = rng.integers(1, 500, size=k).tolist()
            total = int(rng.integers(k, 40))
            counts = apportion_batch(sizes, total)
            assert sum(counts) == total
            assert all(c >= 1 for c in counts)

    def test_largest_remainder_tie_goes_to_lower_index(self):
        assert apportion_batch([1, 1, 1], 4) == [2, 1, 1]

    def test_floor_squeezes_large_tasks(self):
        assert apportion_batch([1, 1, 98], 10) == [1, 1, 8]

    def test_contracts(self):
        with pytest.raises(ContractError):
            apportion_batch([4, 4, 4], 2)
        with pytest.raises(ContractError):
            apportion_batch([0, 3], 4)


# ----------------------------------------------------------------- toy loop

def _toy_tasks(seed=7):
    return [make_synthetic_task(s, seed) for s in default_toy_specs()]


class TestToyTraining:
    def test_three_task_convergence(self):
        tasks = _toy_tasks(seed=7)
        result = train_toy_multitask(tasks, TrainConfig(seed=7))
        for name, acc in result.accuracies.items():
            assert acc >= 0.90, (name, acc, result.accuracies)
        first = np.mean([r["total_loss"] for r in result.records[:10]])
        last = np.mean([r["total_loss"] for r in result.records[-10:]])
        assert last < first

    def test_records_structure_and_weights_move(self):
        tasks = _toy_tasks(seed=1)
        cfg = TrainConfig(steps=20, warmup_steps=5, cooldown_steps=5, seed=1)
        result = train_toy_multitask(tasks, cfg)
        assert len(result.records) == 20
        row = result.records[-1]
        for key in ("step", "lr", "total_loss", "loss_stimulus", "w_modality",
                    "batch_acc_binary"):
            assert key in row, row.keys()
        assert all(np.isfinite(list(r.values())).all() for r in result.records)
        assert not np.allclose(result.loss_weights.data, 0.0)

    def test_deterministic_given_seed(self):
        tasks = _toy_tasks(seed=3)
        cfg = TrainConfig(steps=12, warmup_steps=3, cooldown_steps=3, seed=3)
        r1 = train_toy_multitask(tasks, cfg)
        r2 = train_toy_multitask(tasks, cfg)
        assert r1.records[-1]["total_loss"] == r2.records[-1]["total_loss"]
        np.testing.assert_array_equal(r1.loss_weights.data, r2.loss_weights.data)

    def test_state_dict_covers_backbone_heads_and_weights(self):
        tasks = _toy_tasks(seed=2)
        cfg = TrainConfig(steps=2, warmup_steps=1, cooldown_steps=0, seed=2)
        result = train_toy_multitask(tasks, cfg)
        sd = result.state_dict()
        assert "loss_w" in sd
        assert any(k.startswith("backbone.") for k in sd)
        assert any(k.startswith("heads.2.") for k in sd)


# --------------------------------------------------------------------- LOSO

class TestLoso:
    def test_folds_partition_every_sample_exactly_once(self):
        rng = np.random.default_rng(8)
        subjects = rng.integers(0, 9, size=60)
        folds = loso_folds(subjects)
        assert len(folds) == np.unique(subjects).size
        seen = np.zeros(60, dtype=int)
        for train, test in folds:
            assert np.intersect1d(train, test).size == 0
            assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(60))
            seen[test] += 1
            held_out = np.unique(subjects[test])
            assert held_out.size == 1
            assert held_out[0] not in subjects[train]
        assert np.all(seen == 1)

    def test_subject_count_bounds(self):
        assert len(loso_folds(np.repeat(np.arange(2), 3))) == 2
        assert len(loso_folds(np.repeat(np.arange(87), 2))) == 87
        with pytest.raises(ContractError):
            loso_folds(np.zeros(5, dtype=int))
        with pytest.raises(ContractError):
            loso_folds(np.repeat(np.arange(88), 2))

    def test_nearest_centroid_hand_oracle(self):
        train_x = np.array([[0.0, 0.0], [0.0, 2.0], [10.0, 0.0], [10.0, 2.0]])
        train_y = np.array([0, 0, 1, 1])
        test_x = np.array([[1.0, 1.0], [9.0, 1.0]])
        np.testing.assert_array_equal(
            nearest_centroid(train_x, train_y, test_x, 2), [0, 1])
        with pytest.raises(ContractError):
            nearest_centroid(train_x, np.zeros(4, dtype=int), test_x, 2)

    def test_run_loso_beats_chance_and_tracks_baseline(self):
        spec = SyntheticTaskSpec("gsr", classes=3, subjects=6, samples_per_subject=12,
                                 image=False, dim=16, separation=4.0)
        task = make_synthetic_task(spec, seed=11)
        report = run_loso(task, seed=11)
        assert len(report["folds"]) == 6
        assert report["mean_accuracy"] > 0.8
        assert report["mean_accuracy"] >= report["baseline_mean_accuracy"] - 0.1
        assert 0.0 <= report["mean_macro_f1"] <= 1.0
        assert 0.0 <= report["mean_macro_recall"] <= 1.0

    def test_default_workload_meets_centroid_baseline(self):
        # the pinned reference configuration: trained mean accuracy must not
        # fall below the nearest-centroid oracle
        task = make_synthetic_task(default_loso_spec(), seed=10)
        report = run_loso(task)
        assert len(report["folds"]) == 5
        assert report["mean_accuracy"] >= report["baseline_mean_accuracy"], report

    def test_run_loso_rejects_image_tasks(self):
        task = make_synthetic_task(
            SyntheticTaskSpec("img", classes=2, subjects=2, samples_per_subject=4), 0)
        with pytest.raises(ContractError):
            run_loso(task)
