"""
Trigram language model used to rank monolingual lines by in-domain likelihood.

Probabilities interpolate add-alpha estimates of orders 3, 2 and 1:
    p(w | u v) = l3 * p3(w | u v) + l2 * p2(w | v) + l1 * p1(w)
over the vocabulary of training words, the end marker and the unknown word.
"""

import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

from pydantic import TypeAdapter
from rich.progress import track

from apedit.errors import EmptyCorpus
from apedit.logs import logs
from apedit.vocab import BOS, EOS, UNK

__all__ = ("LmConfig", "TrigramLm", "lm_train", "lm_score", "lm_select", "lm_save", "lm_load", "LM_VERSION")

LM_VERSION = 1
_HEADER_PREFIX = "#apedit-lm"

type Ngram = tuple[str, ...]


@dataclass
class LmConfig:
    alpha: float = 0.1
    # trigram, bigram, unigram
    weights: tuple[float, float, float] = (0.5, 0.3, 0.2)

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if any(w < 0 for w in self.weights) or not math.isclose(sum(self.weights), 1.0, abs_tol=1e-9):
            raise ValueError(f"Interpolation weights must be >= 0 and sum to 1, got {self.weights}")

    @classmethod
    def from_dict(cls, data: dict) -> "LmConfig":
        return TypeAdapter(cls).validate_python(data)

    def dict(self) -> dict:
        return asdict(self)


@dataclass
class TrigramLm:
    config: LmConfig
    counts: Counter[Ngram] = field(default_factory=Counter)
    # Derived: history counts (sum of continuation counts) and vocabulary
    _histories: Counter[Ngram] = field(default_factory=Counter, init=False, repr=False)
    _vocab: set[str] = field(default_factory=set, init=False, repr=False)
    _total: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        self._histories = Counter()
        for ngram, count in self.counts.items():
            if len(ngram) > 1:
                self._histories[ngram[:-1]] += count
        self._vocab = {ngram[0] for ngram in self.counts if len(ngram) == 1} | {EOS, UNK}
        self._total = sum(c for ngram, c in self.counts.items() if len(ngram) == 1)

    @property
    def vocab(self) -> set[str]:
        return self._vocab

    def _map(self, word: str) -> str:
        return word if word in self._vocab or word == BOS else UNK

    def prob(self, word: str, history: tuple[str, str]) -> float:
        alpha, size = self.config.alpha, len(self._vocab)
        w = self._map(word)
        u, v = (self._map(h) for h in history)
        p3 = (self.counts[(u, v, w)] + alpha) / (self._histories[(u, v)] + alpha * size)
        p2 = (self.counts[(v, w)] + alpha) / (self._histories[(v,)] + alpha * size)
        p1 = (self.counts[(w,)] + alpha) / (self._total + alpha * size)
        l3, l2, l1 = self.config.weights
        return l3 * p3 + l2 * p2 + l1 * p1

    def logprob(self, sentence: Sequence[str]) -> float:
        """Natural log-probability of the sentence followed by the end marker."""
        padded = [BOS, BOS, *sentence, EOS]
        return sum(math.log(self.prob(padded[i], (padded[i - 2], padded[i - 1]))) for i in range(2, len(padded)))


def _sentence_ngrams(sentence: Sequence[str]) -> Iterable[Ngram]:
    padded = [BOS, BOS, *sentence, EOS]
    for i in range(2, len(padded)):
        yield (padded[i],)
        yield (padded[i - 1], padded[i])
        yield (padded[i - 2], padded[i - 1], padded[i])


def lm_train(sentences: Iterable[Sequence[str]], config: LmConfig | None = None) -> TrigramLm:
    counts: Counter[Ngram] = Counter()
    nb_sentences = 0
    for sentence in sentences:
        nb_sentences += 1
        counts.update(_sentence_ngrams(sentence))
    if nb_sentences == 0:
        raise EmptyCorpus("Cannot train a language model on an empty corpus")
    lm = TrigramLm(config=config or LmConfig(), counts=counts)
    logs.info(f"Trained trigram LM on {nb_sentences} sentences ({len(lm.vocab)} symbols)")
    return lm


def lm_score(lm: TrigramLm, sentence: Sequence[str]) -> float:
    """Log-probability (end marker included) divided by the number of tokens."""
    return lm.logprob(sentence) / max(len(sentence), 1)


def lm_select[T: Sequence[str]](
    lm: TrigramLm, sentences: Sequence[T], top_k: int, *, show_progress: bool = False
) -> list[T]:
    """The `top_k` best scoring sentences, best first; equal scores keep their input order."""
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    scores = [lm_score(lm, s) for s in track(sentences, disable=not show_progress, description="Scoring...")]
    order = sorted(range(len(sentences)), key=lambda i: -scores[i])
    return [sentences[i] for i in order[:top_k]]


def lm_save(lm: TrigramLm, path: Path):
    """Versioned text file: a header line then `order<TAB>ngram<TAB>count`, sorted by order and n-gram."""
    weights = ",".join(str(w) for w in lm.config.weights)
    lines = [f"{_HEADER_PREFIX} {LM_VERSION} alpha={lm.config.alpha} weights={weights}"]
    for ngram, count in sorted(lm.counts.items(), key=lambda x: (len(x[0]), x[0])):
        lines.append(f"{len(ngram)}\t{' '.join(ngram)}\t{count}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def lm_load(path: Path) -> TrigramLm:
    header, *rows = path.read_text(encoding="utf-8").splitlines()
    parts = header.split()
    if len(parts) < 2 or parts[0] != _HEADER_PREFIX:
        raise ValueError(f"{str(path)!r} is not a language model file (missing {_HEADER_PREFIX!r} header)")
    if int(parts[1]) != LM_VERSION:
        raise ValueError(f"Unsupported language model version {parts[1]} (expected {LM_VERSION})")
    fields = dict(x.split("=", 1) for x in parts[2:])
    config = LmConfig.from_dict(
        {"alpha": float(fields["alpha"]), "weights": tuple(float(w) for w in fields["weights"].split(","))}
    )
    counts: Counter[Ngram] = Counter()
    for row in rows:
        order, ngram, count = row.split("\t")
        _ngram = tuple(ngram.split(" "))
        if len(_ngram) != int(order):
            raise ValueError(f"Malformed n-gram line {row!r} in {str(path)!r}")
        counts[_ngram] = int(count)
    return TrigramLm(config=config, counts=counts)
