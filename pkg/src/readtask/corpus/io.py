"""Interchange format: manifest.json + one JSONL file per subject.

Layout of a corpus directory::

    manifest.json            {schema_version, dataset_id, subjects: [...]}
    <subject_id>.jsonl       one SentenceRecording per line
    <subject_id>_eeg/<sentence_id>.bin   optional continuous EEG

The JSONL line schema (field order is canonical, numbers are IEEE-754
doubles in decimal):

    {"sentence_id": str, "task_label": "NR"|"TSR"|"SR",
     "session_id": int, "block_id": int, "total_reading_ms": float,
     "words": [{"token": str, "band_power": {band: [105 floats]}?}, ...],
     "fixations": [{"onset_ms": f, "duration_ms": f,
                    "word_index": i, "fixation_order": i}, ...],
     "saccades": [{"duration_ms": f, "amplitude_deg": f,
                   "velocity_degps": f, "from_word": i|null,
                   "to_word": i|null}, ...],
     "continuous_eeg": {"file": str, "n_channels": 105, "n_samples": int,
                        "sample_rate_hz": f}?}

Continuous EEG is stored channel-major as little-endian float32. Saving a
loaded corpus reproduces the directory byte-for-byte.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .. import SCHEMA_VERSION
from ..errors import CorpusFormatError, CorpusValidationError
from .types import (
    BAND_NAMES,
    N_CHANNELS,
    TASK_LABELS,
    ContinuousEeg,
    Corpus,
    FixationEvent,
    SaccadeEvent,
    SentenceRecording,
    SubjectData,
    SubjectMeta,
    WordRecord,
)

META_FIELDS = ("lextale", "score_nr", "score_tsr", "speed_nr", "speed_tsr")


# ---------------------------------------------------------------------------
# validation


def validate_corpus(corpus: Corpus) -> None:
    """Check every documented invariant; raise CorpusValidationError naming
    the violated rule and the offending subject/sentence."""
    seen_subjects = set()
    for subj in corpus.subjects:
        sid = subj.meta.subject_id
        if sid in seen_subjects:
            raise CorpusValidationError(f"duplicate subject_id {sid!r}")
        seen_subjects.add(sid)
        _validate_meta(subj.meta)
        seen_sentences = set()
        for sent in subj.sentences:
            if sent.sentence_id in seen_sentences:
                raise CorpusValidationError(
                    f"{sid}: duplicate sentence_id {sent.sentence_id!r}"
                )
            seen_sentences.add(sent.sentence_id)
            _validate_sentence(sid, sent)


def _validate_meta(meta: SubjectMeta) -> None:
    for name in ("lextale", "score_nr", "score_tsr"):
        v = getattr(meta, name)
        if not 0.0 <= v <= 100.0:
            raise CorpusValidationError(
                f"{meta.subject_id}: {name} must be in [0, 100], got {v}"
            )
    for name in ("speed_nr", "speed_tsr"):
        v = getattr(meta, name)
        if not v > 0:
            raise CorpusValidationError(
                f"{meta.subject_id}: {name} must be > 0, got {v}"
            )


def _validate_sentence(sid: str, sent: SentenceRecording) -> None:
    where = f"{sid}/{sent.sentence_id}"
    if sent.task_label not in TASK_LABELS:
        raise CorpusValidationError(
            f"{where}: task_label must be one of {TASK_LABELS}, got {sent.task_label!r}"
        )
    if not sent.words:
        raise CorpusValidationError(f"{where}: words must be nonempty")
    if not sent.total_reading_ms > 0:
        raise CorpusValidationError(f"{where}: total_reading_ms must be > 0")

    n_words = len(sent.words)
    orders = []
    events = []
    for wi, word in enumerate(sent.words):
        for fix in word.fixations:
            if fix.word_index != wi:
                raise CorpusValidationError(
                    f"{where}: fixation attached to word {wi} has word_index {fix.word_index}"
                )
            events.append(fix)
            orders.append(fix.fixation_order)
    for fix in events:
        if not fix.duration_ms > 0:
            raise CorpusValidationError(f"{where}: fixation duration_ms must be > 0")
        if not 0 <= fix.word_index < n_words:
            raise CorpusValidationError(
                f"{where}: fixation word_index {fix.word_index} out of range"
            )
    if sorted(orders) != list(range(len(orders))):
        raise CorpusValidationError(
            f"{where}: fixation_order values must be a permutation of 0..n_fix-1"
        )
    by_order = sorted(events, key=lambda f: f.fixation_order)
    onsets = [f.onset_ms for f in by_order]
    if onsets != sorted(onsets):
        raise CorpusValidationError(
            f"{where}: fixation_order must follow onset_ms order"
        )

    for word in sent.words:
        if word.band_power is None:
            continue
        for band, vec in word.band_power.items():
            if band not in BAND_NAMES:
                raise CorpusValidationError(
                    f"{where}: unknown band name {band!r} (expected one of {BAND_NAMES})"
                )
            arr = np.asarray(vec, dtype=float)
            if arr.shape != (N_CHANNELS,):
                raise CorpusValidationError(
                    f"{where}: band vector length ≠ {N_CHANNELS} for {band!r} "
                    f"(got {arr.shape[0] if arr.ndim == 1 else arr.shape})"
                )
            if not np.all(np.isfinite(arr)):
                raise CorpusValidationError(
                    f"{where}: band power must be finite for {band!r}"
                )
            if np.any(arr < 0):
                raise CorpusValidationError(
                    f"{where}: band power must be non-negative for {band!r}"
                )

    for sac in sent.saccades:
        if not sac.duration_ms > 0:
            raise CorpusValidationError(f"{where}: saccade duration_ms must be > 0")
        if sac.amplitude_deg < 0 or sac.velocity_degps < 0:
            raise CorpusValidationError(
                f"{where}: saccade amplitude/velocity must be >= 0"
            )
        for end in (sac.from_word, sac.to_word):
            if end is not None and not 0 <= end < n_words:
                raise CorpusValidationError(
                    f"{where}: saccade word index {end} out of range"
                )

    eeg = sent.continuous_eeg
    if eeg is not None:
        if not eeg.sample_rate_hz > 0:
            raise CorpusValidationError(f"{where}: sample_rate_hz must be > 0")
        if eeg.data.ndim != 2 or eeg.data.shape[0] != N_CHANNELS:
            raise CorpusValidationError(
                f"{where}: continuous EEG must be {N_CHANNELS} x T, got {eeg.data.shape}"
            )
        for fix in events:
            if fix.onset_ms + fix.duration_ms > eeg.duration_ms + 1e-6:
                raise CorpusValidationError(
                    f"{where}: fixation at {fix.onset_ms} ms extends past the "
                    f"continuous EEG ({eeg.duration_ms:.1f} ms)"
                )


# ---------------------------------------------------------------------------
# loading


def load_corpus(path: str | os.PathLike) -> Corpus:
    """Load and fully validate a corpus directory."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise CorpusFormatError(f"{manifest_path}: manifest not found")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{manifest_path}: {exc}") from exc

    version = manifest.get("schema_version")
    if version != SCHEMA_VERSION:
        raise CorpusFormatError(
            f"{manifest_path}: schema_version {version} not supported "
            f"(expected {SCHEMA_VERSION})"
        )
    try:
        dataset_id = manifest["dataset_id"]
        entries = manifest["subjects"]
    except KeyError as exc:
        raise CorpusFormatError(f"{manifest_path}: missing key {exc}") from exc

    subjects = []
    for entry in entries:
        try:
            meta = SubjectMeta(
                subject_id=entry["subject_id"],
                **{f: float(entry[f]) for f in META_FIELDS},
            )
            fname = entry["file"]
        except KeyError as exc:
            raise CorpusFormatError(
                f"{manifest_path}: subject entry missing key {exc}"
            ) from exc
        subjects.append(_load_subject(root, meta, fname))

    corpus = Corpus(dataset_id=dataset_id, subjects=subjects)
    validate_corpus(corpus)
    return corpus


def _load_subject(root: Path, meta: SubjectMeta, fname: str) -> SubjectData:
    path = root / fname
    if not path.is_file():
        raise CorpusFormatError(f"{path}: subject file not found")
    sentences = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
            try:
                sentences.append(_sentence_from_json(root, obj))
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc!r}") from exc
    return SubjectData(meta=meta, sentences=sentences)


def _sentence_from_json(root: Path, obj: dict) -> SentenceRecording:
    words = [
        WordRecord(
            token=w["token"],
            band_power=(
                {b: np.asarray(v, dtype=float) for b, v in w["band_power"].items()}
                if w.get("band_power") is not None
                else None
            ),
        )
        for w in obj["words"]
    ]
    for f in obj.get("fixations", ()):
        fix = FixationEvent(
            onset_ms=float(f["onset_ms"]),
            duration_ms=float(f["duration_ms"]),
            word_index=int(f["word_index"]),
            fixation_order=int(f["fixation_order"]),
        )
        if not 0 <= fix.word_index < len(words):
            # attach errors are deferred to validation for a better message
            raise ValueError(f"fixation word_index {fix.word_index} out of range")
        words[fix.word_index].fixations.append(fix)
    for w in words:
        w.fixations.sort(key=lambda f: f.fixation_order)

    saccades = [
        SaccadeEvent(
            duration_ms=float(s["duration_ms"]),
            amplitude_deg=float(s["amplitude_deg"]),
            velocity_degps=float(s["velocity_degps"]),
            from_word=None if s.get("from_word") is None else int(s["from_word"]),
            to_word=None if s.get("to_word") is None else int(s["to_word"]),
        )
        for s in obj.get("saccades", ())
    ]

    eeg = None
    ref = obj.get("continuous_eeg")
    if ref is not None:
        bin_path = root / ref["file"]
        n_ch, n_samp = int(ref["n_channels"]), int(ref["n_samples"])
        if not bin_path.is_file():
            raise ValueError(f"continuous EEG file {ref['file']!r} not found")
        raw = np.fromfile(bin_path, dtype="<f4")
        if raw.size != n_ch * n_samp:
            raise ValueError(
                f"continuous EEG file {ref['file']!r} has {raw.size} samples, "
                f"expected {n_ch * n_samp}"
            )
        eeg = ContinuousEeg(
            data=raw.reshape(n_ch, n_samp),
            sample_rate_hz=float(ref["sample_rate_hz"]),
        )

    return SentenceRecording(
        sentence_id=obj["sentence_id"],
        task_label=obj["task_label"],
        session_id=int(obj["session_id"]),
        block_id=int(obj["block_id"]),
        words=words,
        saccades=saccades,
        total_reading_ms=float(obj["total_reading_ms"]),
        continuous_eeg=eeg,
    )


# ---------------------------------------------------------------------------
# saving


def save_corpus(corpus: Corpus, path: str | os.PathLike) -> Path:
    """Write a corpus directory in canonical form (stable key order, compact
    separators), so identical corpora produce identical bytes."""
    validate_corpus(corpus)
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "dataset_id": corpus.dataset_id,
        "subjects": [
            {
                "subject_id": s.meta.subject_id,
                **{f: _jsonable(getattr(s.meta, f)) for f in META_FIELDS},
                "file": f"{s.meta.subject_id}.jsonl",
            }
            for s in corpus.subjects
        ],
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    for subj in corpus.subjects:
        lines = []
        for sent in subj.sentences:
            lines.append(json.dumps(_sentence_to_json(root, subj, sent),
                                     separators=(",", ":")))
        (root / f"{subj.meta.subject_id}.jsonl").write_text(
            "\n".join(lines) + ("\n" if lines else "")
        )
    return root


def _sentence_to_json(root: Path, subj: SubjectData, sent: SentenceRecording) -> dict:
    obj = {
        "sentence_id": sent.sentence_id,
        "task_label": sent.task_label,
        "session_id": sent.session_id,
        "block_id": sent.block_id,
        "total_reading_ms": _jsonable(sent.total_reading_ms),
        "words": [
            {
                "token": w.token,
                **(
                    {
                        "band_power": {
                            b: [_jsonable(v) for v in np.asarray(vec, dtype=float)]
                            for b, vec in w.band_power.items()
                        }
                    }
                    if w.band_power is not None
                    else {}
                ),
            }
            for w in sent.words
        ],
        "fixations": [
            {
                "onset_ms": _jsonable(f.onset_ms),
                "duration_ms": _jsonable(f.duration_ms),
                "word_index": f.word_index,
                "fixation_order": f.fixation_order,
            }
            for f in sent.all_fixations()
        ],
        "saccades": [
            {
                "duration_ms": _jsonable(s.duration_ms),
                "amplitude_deg": _jsonable(s.amplitude_deg),
                "velocity_degps": _jsonable(s.velocity_degps),
                "from_word": s.from_word,
                "to_word": s.to_word,
            }
            for s in sent.saccades
        ],
    }
    if sent.continuous_eeg is not None:
        eeg = sent.continuous_eeg
        rel = f"{subj.meta.subject_id}_eeg/{sent.sentence_id}.bin"
        bin_path = root / rel
        bin_path.parent.mkdir(parents=True, exist_ok=True)
        eeg.data.astype("<f4").tofile(bin_path)
        obj["continuous_eeg"] = {
            "file": rel,
            "n_channels": int(eeg.data.shape[0]),
            "n_samples": int(eeg.data.shape[1]),
            "sample_rate_hz": _jsonable(eeg.sample_rate_hz),
        }
    return obj


def _jsonable(value: float) -> float:
    f = float(value)
    if math.isnan(f) or math.isinf(f):
        raise CorpusValidationError(f"non-finite value {f!r} cannot be serialized")
    return f
