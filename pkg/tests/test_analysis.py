import copy

import numpy as np
import pytest

from readtask.analysis import (
    correlation_table,
    descriptive_stats,
    detect_outliers,
    forward_model_pattern,
    pattern_channels,
    spearman,
    subject_feature_means,
)
from readtask.corpus import (
    Gaussian,
    SubjectMeta,
    SynthSpec,
    TaskParams,
    null_spec,
    omission_only_spec,
    synthesize_corpus,
)
from readtask.corpus.types import SaccadeEvent
from readtask.errors import ParameterError, ProtocolError
from readtask.learners import LinearSvmModel, train_svm


class TestDescriptiveStats:
    def test_identical_tasks_give_large_p(self, null_corpus):
        stats = descriptive_stats(null_corpus)
        for quantity, p in stats.p_values.items():
            assert p > 0.01, quantity
        nr, tsr = stats.per_task["NR"], stats.per_task["TSR"]
        assert nr.mean["omission_rate"] == pytest.approx(
            tsr.mean["omission_rate"], abs=0.05)

    def test_default_spec_recovers_published_means(self):
        corpus = synthesize_corpus(
            omission_only_spec(n_subjects=4, sentences_per_class=80), 5)
        stats = descriptive_stats(corpus)
        assert stats.per_task["NR"].mean["omission_rate"] == pytest.approx(
            0.32, abs=0.02)
        assert stats.per_task["TSR"].mean["omission_rate"] == pytest.approx(
            0.47, abs=0.02)
        assert stats.p_values["omission_rate"] < 1e-6

    def test_planted_shift_detected(self):
        common = dict(sentence_length=Gaussian(15.0, 3.0))
        spec = SynthSpec(
            n_subjects=2, sentences_per_class=40,
            classes={
                "NR": TaskParams(omission_rate=Gaussian(0.2, 0.02),
                                 reading_speed_s=Gaussian(9.0, 0.5), **common),
                "TSR": TaskParams(omission_rate=Gaussian(0.7, 0.02),
                                  reading_speed_s=Gaussian(3.0, 0.5), **common),
            })
        stats = descriptive_stats(synthesize_corpus(spec, 2))
        assert stats.p_values["omission_rate"] < 1e-6
        assert stats.p_values["reading_speed_s"] < 1e-6

    def test_missing_task_rejected(self, null_corpus):
        only_nr = copy.deepcopy(null_corpus)
        for subj in only_nr.subjects:
            subj.sentences = [s for s in subj.sentences
                              if s.task_label == "NR"]
        with pytest.raises(ProtocolError):
            descriptive_stats(only_nr)


class TestOutliers:
    def test_identical_subjects_give_empty_list(self, null_corpus):
        uniform = copy.deepcopy(null_corpus)
        for subj in uniform.subjects:
            subj.sentences = copy.deepcopy(null_corpus.subjects[0].sentences)
        assert detect_outliers(uniform, "omission_rate") == []

    def test_planted_subject_is_unique_outlier(self):
        # 11 subjects as in the first dataset's outlier table; one subject
        # moved to group mean + 5 group-std on max saccade duration
        planted = synthesize_corpus(
            null_spec(n_subjects=11, sentences_per_class=12), 11)
        means = subject_feature_means(planted, "max_sacc_dur")
        center = float(np.mean(list(means.values())))
        spread = float(np.std(list(means.values()), ddof=1))
        target = planted.subjects[0]
        delta = center + 5.0 * spread - means[target.subject_id]
        for sent in target.sentences:
            sent.saccades = [
                SaccadeEvent(duration_ms=s.duration_ms + delta,
                             amplitude_deg=s.amplitude_deg,
                             velocity_degps=s.velocity_degps,
                             from_word=s.from_word, to_word=s.to_word)
                for s in sent.saccades
            ]
        assert detect_outliers(planted, "max_sacc_dur") == \
            [target.subject_id]

    def test_needs_three_subjects(self):
        corpus = synthesize_corpus(
            null_spec(n_subjects=2, sentences_per_class=12), 3)
        with pytest.raises(ProtocolError):
            detect_outliers(corpus, "omission_rate")

    def test_affine_rescaling_invariance(self, null_corpus):
        flagged = detect_outliers(null_corpus, "reading_speed")
        scaled = copy.deepcopy(null_corpus)
        for subj in scaled.subjects:
            for sent in subj.sentences:
                for w in sent.words:
                    w.fixations = [
                        type(f)(onset_ms=f.onset_ms,
                                duration_ms=f.duration_ms * 3.0,
                                word_index=f.word_index,
                                fixation_order=f.fixation_order)
                        for f in w.fixations
                    ]
        assert detect_outliers(scaled, "reading_speed") == flagged

    def test_multicolumn_feature_rejected(self, null_corpus):
        with pytest.raises(ParameterError):
            detect_outliers(null_corpus, "sent_gaze")


class TestSpearman:
    def test_monotone_identity(self):
        assert spearman([1, 2, 3, 4], [10, 20, 30, 40]).rho == 1.0

    def test_antitone(self):
        assert spearman([1, 2, 3, 4], [8, 6, 4, 2]).rho == -1.0

    def test_hand_value_point_eight(self):
        result = spearman([1, 2, 3, 4, 5], [1, 3, 2, 5, 4])
        assert result.rho == pytest.approx(0.8, abs=1e-12)

    def test_constant_input_undefined(self):
        result = spearman([1.0, 1.0, 1.0], [1, 2, 3])
        assert result.undefined
        assert result.rho is None and result.p_value is None

    def test_rank_invariance(self):
        x = [0.3, 9.1, 2.2, 5.5, 4.4]
        y = [12, 1, 7, 3, 9]
        direct = spearman(x, y)
        from readtask.analysis import _average_ranks
        ranked = spearman(_average_ranks(np.asarray(x, dtype=float)),
                          _average_ranks(np.asarray(y, dtype=float)))
        assert direct.rho == pytest.approx(ranked.rho, abs=1e-12)

    def test_ties_use_average_ranks(self):
        result = spearman([1, 1, 2, 3], [1, 2, 3, 4])
        from scipy.stats import spearmanr
        reference = spearmanr([1, 1, 2, 3], [1, 2, 3, 4])
        assert result.rho == pytest.approx(reference.statistic, abs=1e-12)

    def test_p_value_matches_scipy_t_approximation(self):
        x = [1, 2, 3, 4, 5, 6, 7, 8]
        y = [2, 1, 4, 3, 6, 5, 8, 7]
        from scipy.stats import spearmanr
        ours = spearman(x, y)
        reference = spearmanr(x, y)
        assert ours.rho == pytest.approx(reference.statistic, abs=1e-12)
        assert ours.p_value == pytest.approx(reference.pvalue, abs=1e-9)

    def test_false_positive_rate_calibrated(self):
        # |rho| exceeds the p<0.05 threshold in about 5% of null resamples
        rng = np.random.default_rng(0)
        n, hits, trials = 16, 0, 1000
        for _ in range(trials):
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            if spearman(x, y).p_value < 0.05:
                hits += 1
        assert 0.02 <= hits / trials <= 0.08

    def test_short_input_rejected(self):
        with pytest.raises(ParameterError):
            spearman([1, 2], [3, 4])


class TestCorrelationTable:
    def _metas(self, speeds):
        return [
            SubjectMeta(subject_id=f"S{i:02d}", lextale=80.0, score_nr=90.0,
                        score_tsr=85.0, speed_nr=6.0, speed_tsr=speed)
            for i, speed in enumerate(speeds)
        ]

    def test_constructed_monotone_correlation(self):
        speeds = [2.0, 3.0, 4.0, 5.0, 6.0]
        metas = self._metas(speeds)
        accuracies = {"sent_gaze_sacc": {
            m.subject_id: 0.9 - 0.05 * m.speed_tsr for m in metas}}
        rows = correlation_table(accuracies, metas)
        by_cov = {r.covariate: r for r in rows}
        assert by_cov["speed_tsr"].rho == pytest.approx(-1.0)
        assert by_cov["speed_tsr"].significant

    def test_significance_marker_at_n16(self):
        # rho = -0.61 at n = 16 crosses the p < 0.05 threshold
        result = spearman(range(16), _vector_with_rho_minus_061())
        assert result.rho == pytest.approx(-0.61, abs=0.01)
        assert result.p_value < 0.05

    def test_subject_mismatch_rejected(self):
        metas = self._metas([2.0, 3.0, 4.0])
        accuracies = {"sent_gaze": {"MISSING": 0.7}}
        with pytest.raises(ParameterError, match="MISSING"):
            correlation_table(accuracies, metas)

    def test_all_covariates_reported(self):
        metas = self._metas([2.0, 3.0, 4.0, 5.0])
        accuracies = {"sent_gaze": {m.subject_id: 0.6 for m in metas}}
        rows = correlation_table(accuracies, metas)
        assert {r.covariate for r in rows} == {
            "score_nr", "score_tsr", "speed_nr", "speed_tsr", "lextale"}


def _vector_with_rho_minus_061():
    # permutation of 0..15 whose Spearman correlation with 0..15 is -0.6118
    return [6, 14, 12, 10, 8, 15, 13, 5, 11, 7, 3, 0, 4, 2, 1, 9]


class TestForwardModel:
    def test_whitened_features_pattern_proportional_to_weights(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(4000, 3))  # empirical covariance ~ identity
        model = LinearSvmModel(classes=["a", "b"],
                               weights=np.array([[2.0, -1.0, 0.5]]),
                               bias=np.array([0.0]), C=1.0)
        pattern = forward_model_pattern(model, X)[0]
        expected = model.weights[0] / np.linalg.norm(model.weights[0])
        np.testing.assert_allclose(pattern, expected, atol=0.08)

    def test_correlated_silent_channel_recovered(self):
        # channels 0 and 1 carry the same informative signal; channel 2 is
        # noise. A sparse weight on channel 0 only must still produce a
        # pattern with both informative channels active.
        rng = np.random.default_rng(1)
        n = 2000
        signal = rng.normal(size=n)
        X = np.column_stack([
            signal + 0.05 * rng.normal(size=n),
            signal + 0.05 * rng.normal(size=n),
            rng.normal(size=n),
        ])
        model = LinearSvmModel(classes=["a", "b"],
                               weights=np.array([[1.0, 0.0, 0.0]]),
                               bias=np.array([0.0]), C=1.0)
        pattern = forward_model_pattern(model, X)[0]
        assert abs(pattern[1]) > 0.5 * abs(pattern[0])
        assert abs(pattern[2]) < 0.2 * abs(pattern[0])

    def test_label_flip_flips_pattern_sign(self):
        rng = np.random.default_rng(2)
        X = np.vstack([rng.normal(-1, 0.5, size=(40, 2)),
                       rng.normal(+1, 0.5, size=(40, 2))])
        labels = ["a"] * 40 + ["b"] * 40
        flipped = ["b"] * 40 + ["a"] * 40
        m1 = train_svm((X, labels), C=1.0, seed=0)
        m2 = train_svm((X, flipped), C=1.0, seed=0)
        p1 = forward_model_pattern(m1, X)[0]
        p2 = forward_model_pattern(m2, X)[0]
        np.testing.assert_allclose(p1, -p2, atol=0.05)

    def test_positive_weight_rescaling_invariant(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(100, 4))
        model = LinearSvmModel(classes=["a", "b"],
                               weights=np.array([[1.0, 2.0, -0.5, 0.0]]),
                               bias=np.array([0.1]), C=1.0)
        scaled = LinearSvmModel(classes=model.classes,
                                weights=5.0 * model.weights,
                                bias=model.bias, C=1.0)
        np.testing.assert_allclose(forward_model_pattern(model, X),
                                   forward_model_pattern(scaled, X),
                                   atol=1e-12)

    def test_pattern_is_unit_norm(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 6))
        model = LinearSvmModel(classes=["a", "b"],
                               weights=rng.normal(size=(1, 6)),
                               bias=np.array([0.0]), C=1.0)
        pattern = forward_model_pattern(model, X)
        assert np.linalg.norm(pattern[0]) == pytest.approx(1.0)

    def test_dimension_mismatch_rejected(self):
        model = LinearSvmModel(classes=["a", "b"],
                               weights=np.ones((1, 3)),
                               bias=np.array([0.0]), C=1.0)
        with pytest.raises(ParameterError):
            forward_model_pattern(model, np.ones((10, 4)))

    def test_pattern_channels_split(self):
        pattern = np.arange(420.0)
        split = pattern_channels(pattern)
        assert list(split) == ["theta", "alpha", "beta", "gamma"]
        np.testing.assert_array_equal(split["alpha"],
                                      np.arange(105.0, 210.0))
        single = pattern_channels(np.arange(105.0))
        assert list(single) == ["all"]
