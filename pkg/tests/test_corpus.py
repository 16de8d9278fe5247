import json

import numpy as np
import pytest

from readtask.corpus import (
    Corpus,
    Gaussian,
    SubjectData,
    SubjectMeta,
    SynthSpec,
    TaskParams,
    load_corpus,
    null_spec,
    omission_only_spec,
    save_corpus,
    synthesize_corpus,
    validate_corpus,
    zuco1_like_spec,
)
from readtask.errors import CorpusFormatError, CorpusValidationError, ParameterError
from tests.conftest import make_sentence


def tiny_corpus():
    meta = SubjectMeta(subject_id="A01", lextale=90.0, score_nr=85.0,
                       score_tsr=92.0, speed_nr=6.0, speed_tsr=4.0)
    s1 = make_sentence([(0, 150), (1, 100), (0, 80), (2, 120)], 3,
                       sentence_id="nr_0", task_label="NR")
    s2 = make_sentence([(0, 200), (2, 140)], 4,
                       sentence_id="tsr_0", task_label="TSR", block_id=2)
    return Corpus(dataset_id="tiny", subjects=[SubjectData(meta, [s1, s2])])


class TestLoadSave:
    def test_round_trip_is_byte_identical(self, tmp_path):
        corpus = tiny_corpus()
        first = tmp_path / "first"
        second = tmp_path / "second"
        save_corpus(corpus, first)
        save_corpus(load_corpus(first), second)
        for path in sorted(first.iterdir()):
            if path.is_file():
                assert path.read_bytes() == (second / path.name).read_bytes()

    def test_minimal_fixture_loads(self, tmp_path):
        save_corpus(tiny_corpus(), tmp_path / "c")
        loaded = load_corpus(tmp_path / "c")
        assert loaded.n_subjects == 1
        assert len(loaded.subjects[0].sentences) == 2
        assert loaded.subjects[0].sentences[0].words[0].token == "w0"

    def test_malformed_json_reports_file_and_line(self, tmp_path):
        root = tmp_path / "c"
        save_corpus(tiny_corpus(), root)
        target = root / "A01.jsonl"
        lines = target.read_text().splitlines()
        lines[1] = lines[1][:-1]  # truncate the closing brace
        target.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorpusFormatError, match=r"A01\.jsonl:2"):
            load_corpus(root)

    def test_wrong_band_vector_length_rejected(self, tmp_path):
        root = tmp_path / "c"
        save_corpus(tiny_corpus(), root)
        target = root / "A01.jsonl"
        lines = target.read_text().splitlines()
        obj = json.loads(lines[0])
        obj["words"][0]["band_power"] = {"theta": [1.0] * 104}
        lines[0] = json.dumps(obj, separators=(",", ":"))
        target.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorpusValidationError, match="band vector length"):
            load_corpus(root)

    def test_duplicate_sentence_id_rejected(self, tmp_path):
        root = tmp_path / "c"
        save_corpus(tiny_corpus(), root)
        target = root / "A01.jsonl"
        lines = target.read_text().splitlines()
        obj = json.loads(lines[1])
        obj["sentence_id"] = "nr_0"
        lines[1] = json.dumps(obj, separators=(",", ":"))
        target.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorpusValidationError, match="duplicate sentence_id"):
            load_corpus(root)

    def test_continuous_eeg_round_trip(self, tmp_path, continuous_corpus):
        first = tmp_path / "first"
        second = tmp_path / "second"
        save_corpus(continuous_corpus, first)
        reloaded = load_corpus(first)
        save_corpus(reloaded, second)
        for path in sorted(first.rglob("*")):
            if path.is_file():
                rel = path.relative_to(first)
                assert path.read_bytes() == (second / rel).read_bytes(), rel
        sent = reloaded.subjects[0].sentences[0]
        assert sent.continuous_eeg is not None
        assert sent.continuous_eeg.data.shape[0] == 105


class TestValidation:
    def test_fixation_order_must_be_permutation(self):
        corpus = tiny_corpus()
        sent = corpus.subjects[0].sentences[0]
        bad = sent.words[0].fixations[0]
        sent.words[0].fixations[0] = type(bad)(
            onset_ms=bad.onset_ms, duration_ms=bad.duration_ms,
            word_index=bad.word_index, fixation_order=7)
        with pytest.raises(CorpusValidationError, match="permutation"):
            validate_corpus(corpus)

    def test_nonpositive_duration_rejected(self):
        corpus = tiny_corpus()
        sent = corpus.subjects[0].sentences[0]
        bad = sent.words[0].fixations[0]
        sent.words[0].fixations[0] = type(bad)(
            onset_ms=bad.onset_ms, duration_ms=0.0,
            word_index=bad.word_index, fixation_order=bad.fixation_order)
        with pytest.raises(CorpusValidationError, match="duration_ms"):
            validate_corpus(corpus)

    def test_bad_meta_percent_rejected(self):
        corpus = tiny_corpus()
        corpus.subjects[0].meta.lextale = 140.0
        with pytest.raises(CorpusValidationError, match="lextale"):
            validate_corpus(corpus)


class TestSynthesis:
    def test_pure_function_of_spec_and_seed(self):
        spec = omission_only_spec(n_subjects=2, sentences_per_class=10)
        a = synthesize_corpus(spec, 42)
        b = synthesize_corpus(spec, 42)
        assert a.subjects[0].sentences[3].total_reading_ms == \
            b.subjects[0].sentences[3].total_reading_ms
        fixes_a = a.subjects[1].sentences[5].all_fixations()
        fixes_b = b.subjects[1].sentences[5].all_fixations()
        assert [f.onset_ms for f in fixes_a] == [f.onset_ms for f in fixes_b]

    def test_different_seed_changes_data(self):
        spec = omission_only_spec(n_subjects=1, sentences_per_class=10)
        a = synthesize_corpus(spec, 1)
        b = synthesize_corpus(spec, 2)
        assert a.subjects[0].sentences[0].total_reading_ms != \
            b.subjects[0].sentences[0].total_reading_ms

    def test_default_spec_omission_mean_within_three_se(self):
        # published NR omission statistics: mean 0.32, std 0.09
        spec = zuco1_like_spec(n_subjects=4, sentences_per_class=50,
                               with_eeg=False)
        corpus = synthesize_corpus(spec, 7)
        rates = []
        for subj in corpus.subjects:
            for sent in subj.sentences:
                if sent.task_label == "NR":
                    skipped = sum(1 for w in sent.words if not w.fixations)
                    rates.append(skipped / len(sent.words))
        se = 0.09 / np.sqrt(len(rates))
        assert abs(np.mean(rates) - 0.32) <= 3 * se

    def test_fixated_word_count_matches_realized_omission_exactly(self):
        spec = omission_only_spec(n_subjects=1, sentences_per_class=20)
        corpus = synthesize_corpus(spec, 5)
        for sent in corpus.subjects[0].sentences:
            fixated = sum(1 for w in sent.words if w.fixations)
            skipped = sum(1 for w in sent.words if not w.fixations)
            # integer form of: fixated = words * (1 - realized omission)
            assert fixated == len(sent.words) - skipped
            assert skipped / len(sent.words) <= 1.0
            assert fixated >= 1

    def test_synthetic_corpus_validates(self, eeg_corpus):
        validate_corpus(eeg_corpus)

    def test_nonpositive_std_rejected(self):
        with pytest.raises(ParameterError, match="std"):
            spec = SynthSpec(classes={
                "NR": TaskParams(omission_rate=Gaussian(0.3, 0.0),
                                 reading_speed_s=Gaussian(5.0, 1.0)),
                "TSR": TaskParams(omission_rate=Gaussian(0.4, 0.1),
                                  reading_speed_s=Gaussian(5.0, 1.0)),
            })
            synthesize_corpus(spec, 0)

    def test_nonpositive_counts_rejected(self):
        with pytest.raises(ParameterError, match="n_subjects"):
            synthesize_corpus(null_spec(n_subjects=0), 0)

    def test_block_layout_alternates_tasks(self, eeg_corpus):
        block_tasks = {}
        for subj, sent in eeg_corpus.iter_sentences():
            block_tasks.setdefault(sent.block_id, set()).add(sent.task_label)
        assert all(len(tasks) == 1 for tasks in block_tasks.values())
        assert len(block_tasks) == 14
