import json

import numpy as np
import pytest

from readtask.corpus import (
    EegParams,
    Gaussian,
    SynthSpec,
    TaskParams,
    block_drift_spec,
    null_spec,
    omission_only_spec,
    synthesize_corpus,
    zuco1_like_spec,
    zuco2_like_spec,
)
from readtask.errors import ProtocolError
from readtask.evaluation import (
    block_ablation,
    cross_subject,
    fixation_ablation,
    load_report,
    median_mad,
    relabel_and_classify,
    stratified_kfold,
    stratified_split,
    within_subject_sentence,
    within_subject_word,
)
from readtask.learners import LstmHyperParams

TINY_LSTM = LstmHyperParams(hidden_size=4, dense_size=4, max_epochs=2,
                            patience=104, batch_size=16)


class TestMedianMad:
    def test_hand_values(self):
        assert median_mad([1, 2, 3]) == (2.0, 1.0)

    def test_singleton(self):
        assert median_mad([5]) == (5.0, 0.0)

    def test_even_length_averaging(self):
        med, mad = median_mad([0.6, 0.6, 0.9, 0.9])
        assert med == pytest.approx(0.75)
        assert mad == pytest.approx(0.15)

    def test_empty_rejected(self):
        with pytest.raises(ProtocolError):
            median_mad([])


class TestSplits:
    def test_kfold_partitions_exactly(self):
        rng = np.random.default_rng(0)
        labels = ["a"] * 17 + ["b"] * 13
        folds = stratified_kfold(labels, 3, rng)
        joined = np.sort(np.concatenate(folds))
        np.testing.assert_array_equal(joined, np.arange(30))
        for i in range(3):
            for j in range(i + 1, 3):
                assert not set(folds[i]) & set(folds[j])

    def test_split_is_stratified(self):
        rng = np.random.default_rng(1)
        labels = ["a"] * 50 + ["b"] * 50
        train, test = stratified_split(labels, 0.1, rng)
        test_labels = [labels[i] for i in test]
        assert test_labels.count("a") == 5
        assert test_labels.count("b") == 5
        assert len(set(train) & set(test)) == 0

    def test_split_keeps_both_sides_nonempty_per_class(self):
        rng = np.random.default_rng(2)
        labels = ["a", "a", "b", "b"]
        train, test = stratified_split(labels, 0.1, rng)
        train_labels = {labels[i] for i in train}
        test_labels = {labels[i] for i in test}
        assert train_labels == {"a", "b"}
        assert test_labels == {"a", "b"}


class TestWithinSubjectSentence:
    def test_zero_separation_stays_near_chance(self, null_corpus):
        report = within_subject_sentence(null_corpus, "omission_rate",
                                         runs=30, master_seed=3)
        assert 0.45 <= report.median <= 0.55

    def test_oracle_corpus_reaches_bayes_within_tolerance(self, omission_corpus):
        from readtask.corpus import bayes_oracle
        target = bayes_oracle(
            omission_only_spec(n_subjects=3, sentences_per_class=60),
            feature="omission_rate").accuracy
        report = within_subject_sentence(omission_corpus, "omission_rate",
                                         runs=30, master_seed=3)
        assert abs(report.median - target) <= 0.05

    def test_report_reproducible_byte_identical(self, tmp_path, null_corpus):
        a = within_subject_sentence(null_corpus, "sent_gaze", runs=5,
                                    master_seed=21)
        b = within_subject_sentence(null_corpus, "sent_gaze", runs=5,
                                    master_seed=21, jobs=1)
        pa, pb = tmp_path / "a.json", tmp_path / "b.json"
        a.write_json(pa)
        b.write_json(pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_median_mad_recomputable_from_subject_list(self, null_corpus):
        report = within_subject_sentence(null_corpus, "sent_gaze", runs=5,
                                         master_seed=1)
        med, mad = median_mad(report.accuracies)
        assert report.median == med
        assert report.mad == mad

    def test_small_subjects_skipped_with_warning(self):
        spec = omission_only_spec(n_subjects=2, sentences_per_class=3)
        corpus = synthesize_corpus(spec, 1)
        with pytest.raises(ProtocolError):
            within_subject_sentence(corpus, "omission_rate", runs=2,
                                    master_seed=0, min_samples=10)
        report = within_subject_sentence(corpus, "omission_rate", runs=2,
                                         master_seed=0, min_samples=5)
        assert not report.skipped

    def test_confusion_rows_sum_to_test_counts(self, null_corpus):
        runs = 4
        report = within_subject_sentence(null_corpus, "sent_gaze", runs=runs,
                                         master_seed=2)
        subject = report.subjects[0]
        confusion = np.asarray(subject.confusion)
        n = subject.n_samples
        per_class = {lab: 0 for lab in report.class_names}
        # per run the stratified split takes round(0.1 * n_c) per class
        sub_labels = [
            lab for g, lab in zip(
                _matrix_cache(null_corpus).groups,
                _matrix_cache(null_corpus).labels)
            if g.subject_id == subject.subject_id and lab in ("NR", "TSR")
        ]
        for lab in sub_labels:
            per_class[lab] += 1
        for k, lab in enumerate(report.class_names):
            expected = runs * max(1, round(0.1 * per_class[lab]))
            assert confusion[k].sum() == expected

    def test_report_json_round_trip(self, tmp_path, null_corpus):
        report = within_subject_sentence(null_corpus, "sent_gaze", runs=3,
                                         master_seed=9)
        path = report.write_json(tmp_path / "report.json")
        loaded = load_report(path)
        assert loaded.median == report.median
        assert loaded.subjects[0].run_accuracies == \
            report.subjects[0].run_accuracies


_MATRIX_CACHE = {}


def _matrix_cache(corpus):
    key = id(corpus)
    if key not in _MATRIX_CACHE:
        from readtask.features import assemble
        _MATRIX_CACHE[key] = assemble(corpus, "sent_gaze")
    return _MATRIX_CACHE[key]


class TestNoLeakage:
    def test_within_subject_train_test_disjoint(self, null_corpus):
        # re-derive the splits the protocol used and check sentence ids
        from readtask.features import assemble
        from readtask.seeding import derived_rng
        matrix = assemble(null_corpus, "sent_gaze")
        for sid in null_corpus.subject_ids:
            sub = matrix.for_subject(sid)
            for run in range(5):
                rng = derived_rng(17, "run", sid, run)
                train, test = stratified_split(sub.labels, 0.1, rng)
                train_ids = {sub.groups[i].sentence_id for i in train}
                test_ids = {sub.groups[i].sentence_id for i in test}
                assert not train_ids & test_ids

    def test_cross_subject_never_sees_test_subject(self, omission_corpus):
        report = cross_subject(omission_corpus, "omission_rate",
                               master_seed=0)
        assert len(report.subjects) == omission_corpus.n_subjects


class TestCrossSubject:
    def test_exactly_n_models(self, omission_corpus):
        report = cross_subject(omission_corpus, "omission_rate", master_seed=1)
        assert len(report.subjects) == 3
        assert all(len(s.run_accuracies) == 1 for s in report.subjects)

    def test_iid_subjects_near_bayes(self, omission_corpus):
        from readtask.corpus import bayes_oracle
        target = bayes_oracle(
            omission_only_spec(n_subjects=3, sentences_per_class=60),
            feature="omission_rate").accuracy
        report = cross_subject(omission_corpus, "omission_rate", master_seed=1)
        assert abs(report.median - target) <= 0.07

    def test_fewer_than_three_subjects_rejected(self):
        corpus = synthesize_corpus(
            omission_only_spec(n_subjects=2, sentences_per_class=12), 0)
        with pytest.raises(ProtocolError, match=">= 3 subjects"):
            cross_subject(corpus, "omission_rate")

    def test_word_level_cross_subject_runs(self):
        corpus = synthesize_corpus(
            omission_only_spec(n_subjects=3, sentences_per_class=8), 2)
        report = cross_subject(corpus, "eye_tracking", hyper=TINY_LSTM,
                               master_seed=0)
        assert report.model_family == "bilstm"
        assert len(report.subjects) == 3


class TestWithinSubjectWord:
    def test_fold_partition_and_report(self):
        corpus = synthesize_corpus(
            omission_only_spec(n_subjects=1, sentences_per_class=12), 4)
        report = within_subject_word(corpus, "eye_tracking", folds=3, seeds=2,
                                     hyper=TINY_LSTM, master_seed=0)
        subject = report.subjects[0]
        assert len(subject.run_accuracies) == 6  # folds x seeds
        confusion = np.asarray(subject.confusion)
        # every sample appears in exactly one test fold per seed
        assert confusion.sum() == 2 * subject.n_samples

    def test_zero_separation_word_level_near_chance(self):
        corpus = synthesize_corpus(
            null_spec(n_subjects=3, sentences_per_class=60), 6)
        report = within_subject_word(corpus, "eye_tracking", folds=3, seeds=1,
                                     hyper=TINY_LSTM, master_seed=1)
        assert 0.40 <= report.median <= 0.60

    def test_word_level_learns_planted_eeg_separation(self):
        from dataclasses import replace
        spec = zuco2_like_spec(n_subjects=1, sentences_per_class=30)
        spec = replace(spec, eeg=EegParams(
            class_shift={"gamma": {"TSR": 0.6}},
            sentence_std=0.2, word_std=0.15))
        corpus = synthesize_corpus(spec, 15)
        hyper = LstmHyperParams(hidden_size=12, dense_size=12, max_epochs=20,
                                patience=104, batch_size=16)
        report = within_subject_word(corpus, "eeg_gamma", folds=3, seeds=1,
                                     hyper=hyper, master_seed=2)
        assert report.median >= 0.65


class TestRelabel:
    def test_block_scheme_14_way_confusion(self, eeg_corpus):
        report = relabel_and_classify(eeg_corpus, "block", "sent_gaze",
                                      runs=3, master_seed=5)
        assert len(report.class_names) == 14
        confusion = np.asarray(report.subjects[0].confusion)
        assert confusion.shape == (14, 14)
        assert report.chance_level == pytest.approx(1 / 14)

    def test_subject_scheme_reports_chance_level(self, eeg_corpus):
        report = relabel_and_classify(eeg_corpus, "subject", "sent_gaze",
                                      runs=4, master_seed=5)
        assert report.chance_level == pytest.approx(1 / 3)
        assert len(report.subjects) == 1
        assert len(report.subjects[0].run_accuracies) == 4

    def test_balanced_null_session_near_chance(self):
        spec = zuco1_like_spec(n_subjects=2, sentences_per_class=30,
                               with_eeg=False)
        # make the two classes identical so session carries no signal
        nr = spec.classes["NR"]
        spec.classes["TSR"] = TaskParams(
            omission_rate=nr.omission_rate,
            reading_speed_s=nr.reading_speed_s,
            sentence_length=nr.sentence_length,
        )
        corpus = synthesize_corpus(spec, 12)
        report = relabel_and_classify(corpus, "session", "sent_gaze",
                                      balanced=True, runs=20, master_seed=3)
        assert 0.40 <= report.median <= 0.60

    def test_session_scheme_includes_sr_sentences(self):
        spec = zuco1_like_spec(n_subjects=1, sentences_per_class=20,
                               with_eeg=False)
        classes = dict(spec.classes)
        classes["SR"] = TaskParams(
            omission_rate=Gaussian(0.4, 0.1),
            reading_speed_s=Gaussian(5.0, 1.0),
            sentence_length=Gaussian(15.0, 4.0),
        )
        spec = SynthSpec(**{**spec.__dict__, "classes": classes})
        corpus = synthesize_corpus(spec, 9)
        report = relabel_and_classify(corpus, "session", "sent_gaze",
                                      runs=2, master_seed=0)
        assert report.subjects[0].n_samples == 60  # 20 NR + 20 TSR + 20 SR
        # task scheme excludes SR
        task_report = within_subject_sentence(corpus, "sent_gaze", runs=2,
                                              master_seed=0)
        assert task_report.subjects[0].n_samples == 40

    def test_unknown_scheme_rejected(self, null_corpus):
        with pytest.raises(ProtocolError, match="unknown label scheme"):
            within_subject_sentence(null_corpus, "sent_gaze", scheme="nope")


class TestBlockAblation:
    def test_flat_curve_without_block_signal(self):
        # 1-D feature with a saturated learning curve and no block effects
        common = dict(reading_speed_s=Gaussian(5.0, 1.2),
                      sentence_length=Gaussian(18.0, 6.0))
        spec = SynthSpec(
            dataset_id="flat", n_subjects=2, sentences_per_class=112,
            classes={
                "NR": TaskParams(omission_rate=Gaussian(0.30, 0.08), **common),
                "TSR": TaskParams(omission_rate=Gaussian(0.50, 0.08), **common),
            },
            blocks_per_task=7, session_layout="single")
        corpus = synthesize_corpus(spec, 8)
        report = block_ablation(corpus, "omission_rate",
                                k_values=range(1, 7), repeats=5,
                                master_seed=4)
        spread = max(report.mean_accuracy) - min(report.mean_accuracy)
        assert spread <= 0.05

    def test_drift_corpus_trend_increasing(self):
        corpus = synthesize_corpus(
            block_drift_spec(n_subjects=2, sentences_per_class=112), 9)
        report = block_ablation(corpus, "electrode_features_gamma",
                                k_values=range(1, 7), repeats=5,
                                master_seed=4)
        from readtask.analysis import spearman
        rho = spearman(report.k_values, report.mean_accuracy).rho
        assert rho is not None and rho > 0.8

    def test_k6_uses_more_training_data_than_k1(self, eeg_corpus):
        report = block_ablation(eeg_corpus, "sent_gaze",
                                k_values=[1, 6], repeats=1, master_seed=0)
        assert report.k_values == [1, 6]
        assert len(report.accuracies_per_k["1"]) == len(
            report.accuracies_per_k["6"])

    def test_insufficient_blocks_rejected(self):
        spec = zuco2_like_spec(n_subjects=1, sentences_per_class=12)
        spec = SynthSpec(**{**spec.__dict__, "blocks_per_task": 3})
        corpus = synthesize_corpus(spec, 2)
        with pytest.raises(ProtocolError, match="blocks"):
            block_ablation(corpus, "sent_gaze", k_values=range(1, 7),
                           repeats=1)


class TestFixationAblation:
    def test_full_fraction_matches_canonical_columns(self, eeg_corpus):
        report = fixation_ablation(eeg_corpus, band="gamma",
                                   fractions=(0.2, 1.0), runs=3,
                                   master_seed=6)
        assert set(report.reports) == {"0.2", "1"}
        for sub_report in report.reports.values():
            assert len(sub_report.subjects) == 3

    def test_csv_has_row_per_subject_per_fraction(self, tmp_path, eeg_corpus):
        fractions = (0.1, 0.2, 0.5, 0.75, 1.0)
        report = fixation_ablation(eeg_corpus, band="gamma",
                                   fractions=fractions, runs=2,
                                   master_seed=6)
        path = report.write_csv(tmp_path / "ablate.csv")
        rows = path.read_text().strip().splitlines()
        assert len(rows) == 1 + 3 * len(fractions)


def test_jobs_parameter_does_not_change_results(null_corpus):
    serial = within_subject_sentence(null_corpus, "sent_gaze", runs=4,
                                     master_seed=13, jobs=1)
    threaded = within_subject_sentence(null_corpus, "sent_gaze", runs=4,
                                       master_seed=13, jobs=4)
    assert json.dumps(serial.to_dict()) == json.dumps(threaded.to_dict())
