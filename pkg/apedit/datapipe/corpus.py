from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from apedit.editops import Sentence, detokenize, tokenize
from apedit.errors import EmptyCorpus, LineCountMismatch
from apedit.logs import logs
from apedit.vocab import WORD_SPECIALS, Vocab

__all__ = (
    "Triple",
    "read_lines",
    "load_parallel",
    "load_triples",
    "write_lines",
    "write_triples",
    "split_dev",
    "build_word_vocab",
)


@dataclass(frozen=True)
class Triple:
    src: Sentence
    mt: Sentence
    pe: Sentence


def read_lines(path: Path) -> list[Sentence]:
    with path.open(encoding="utf-8") as f:
        return [tokenize(line) for line in f]


def load_parallel(paths: Sequence[Path]) -> list[tuple[Sentence, ...]]:
    """Line-aligned tokenized files, returned as rows (one tuple per line)."""
    columns = [read_lines(p) for p in paths]
    counts = [len(c) for c in columns]
    if len(set(counts)) > 1:
        raise LineCountMismatch([str(p) for p in paths], counts)
    logs.debug(f"Loaded {counts[0] if counts else 0} lines from {len(paths)} parallel files")
    return list(zip(*columns))


def load_triples(src: Path | None, mt: Path, pe: Path) -> list[Triple]:
    """Load (SRC, MT, PE) triples. Without a source file, `src` is left empty."""
    if src is None:
        return [Triple(src=[], mt=m, pe=p) for m, p in load_parallel([mt, pe])]
    return [Triple(src=s, mt=m, pe=p) for s, m, p in load_parallel([src, mt, pe])]


def write_lines(path: Path, sentences: Iterable[Sequence[str]]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for sentence in sentences:
            f.write(detokenize(sentence) + "\n")


def write_triples(prefix: Path, triples: Sequence[Triple]) -> tuple[Path, Path, Path]:
    """Write `<prefix>.src`, `<prefix>.mt` and `<prefix>.pe`."""
    paths = tuple(prefix.with_name(f"{prefix.name}.{side}") for side in ("src", "mt", "pe"))
    write_lines(paths[0], (t.src for t in triples))
    write_lines(paths[1], (t.mt for t in triples))
    write_lines(paths[2], (t.pe for t in triples))
    return paths  # type: ignore[return-value]


def split_dev[T](rows: Sequence[T], size: int, seed: int) -> tuple[list[T], list[T]]:
    """Hold out `size` random rows; both parts keep the input order."""
    if not 1 <= size < len(rows):
        raise ValueError(f"Dev size must be in [1, {len(rows) - 1}], got {size}")
    held_out = set(np.random.default_rng(seed).permutation(len(rows))[:size].tolist())
    train = [r for i, r in enumerate(rows) if i not in held_out]
    dev = [r for i, r in enumerate(rows) if i in held_out]
    return train, dev


def build_word_vocab(sentences: Iterable[Sequence[str]], limit: int) -> Vocab:
    """PAD/UNK/BOS/EOS then the `limit - 4` most frequent words (ties broken lexicographically)."""
    if limit < len(WORD_SPECIALS):
        raise ValueError(f"Word vocab limit must be >= {len(WORD_SPECIALS)}, got {limit}")
    counts: Counter[str] = Counter()
    nb_sentences = 0
    for sentence in sentences:
        nb_sentences += 1
        counts.update(sentence)
    if nb_sentences == 0:
        raise EmptyCorpus("Cannot build a word vocabulary from an empty corpus")
    vocab = Vocab.words(counts, limit)
    logs.info(f"Built word vocab of {len(vocab)} symbols ({len(counts)} distinct words)")
    return vocab
