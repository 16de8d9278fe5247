"""Readability baseline and precomputed word-embedding ingestion.

The reading-ease score for a single sentence of W words with S total
syllables is ``206.835 - 1.015 * W - 84.6 * (S / W)`` (the standard
English weighting factors). Syllables come from the classic vowel-group
heuristic; it is intentionally simple, and the constants below keep the
golden test values stable.

Embeddings are a static token -> vector table read from a text file (one
line per token: ``token<TAB>v1 v2 ... vd``). A ``<unk>`` line, when
present, supplies the out-of-vocabulary fallback; otherwise the fallback
is the zero vector. Static vectors only approximate a contextual
embedding baseline and are documented as such.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus.types import Corpus
from .errors import CorpusFormatError, ParameterError

VOWELS = frozenset("aeiouy")
FALLBACK_TOKEN = "<unk>"


@dataclass(frozen=True)
class FleschWeights:
    base: float = 206.835
    per_word: float = 1.015
    per_syllable: float = 84.6


ENGLISH_WEIGHTS = FleschWeights()


def count_syllables(word: str) -> int:
    """Vowel-group count, minus a silent terminal 'e' (kept after 'l', as
    in '-le'), with a floor of one."""
    letters = "".join(c for c in word.lower() if c.isalpha())
    if not letters:
        return 1
    groups = 0
    in_group = False
    for c in letters:
        if c in VOWELS:
            if not in_group:
                groups += 1
            in_group = True
        else:
            in_group = False
    if len(letters) >= 2 and letters[-1] == "e" and letters[-2] != "l":
        groups -= 1
    return max(1, groups)


def flesch_score(sentence_tokens: list[str],
                 weights: FleschWeights = ENGLISH_WEIGHTS) -> float:
    """Reading-ease score of one sentence."""
    if not sentence_tokens:
        raise ParameterError("flesch_score needs at least one token")
    n_words = len(sentence_tokens)
    n_syllables = sum(count_syllables(t) for t in sentence_tokens)
    return (weights.base - weights.per_word * n_words
            - weights.per_syllable * (n_syllables / n_words))


def fre_feature_matrix(corpus: Corpus):
    """One-column matrix of per-sentence reading-ease scores, classified
    downstream by the standard sentence-level pipeline."""
    from .features import FeatureMatrix, SampleGroup

    rows, labels, groups = [], [], []
    for subj, sent in corpus.iter_sentences():
        rows.append([flesch_score([w.token for w in sent.words])])
        labels.append(sent.task_label)
        groups.append(SampleGroup(
            subject_id=subj.subject_id,
            session_id=sent.session_id,
            block_id=sent.block_id,
            sentence_id=sent.sentence_id,
        ))
    return FeatureMatrix(
        set_name="fre",
        feature_names=["fre"],
        values=np.asarray(rows, dtype=float),
        labels=labels,
        groups=groups,
    )


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]
    fallback: np.ndarray

    def lookup(self, token: str) -> np.ndarray:
        hit = self.vectors.get(token)
        if hit is None:
            hit = self.vectors.get(token.lower())
        return hit if hit is not None else self.fallback

    def __contains__(self, token: str) -> bool:
        return token in self.vectors or token.lower() in self.vectors


def load_embeddings(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                token, values = line.split("\t", 1)
                vec = np.array([float(v) for v in values.split()])
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise CorpusFormatError(
                    f"{path}:{lineno}: vector has {vec.size} dims, expected {dim}"
                )
            vectors[token] = vec
    if dim is None:
        raise CorpusFormatError(f"{path}: empty embedding file")
    fallback = vectors.pop(FALLBACK_TOKEN, np.zeros(dim))
    return EmbeddingTable(dim=dim, vectors=vectors, fallback=fallback)
