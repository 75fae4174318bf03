from collections.abc import Sequence
from dataclasses import dataclass

from sacrebleu.metrics import BLEU

from apedit.errors import EmptyCorpus

__all__ = ("BleuScore", "bleu_corpus", "NGRAM_ORDER")

NGRAM_ORDER = 4


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: list[float]
    bp: float
    sys_len: int
    ref_len: int

    def format(self, width: int = 2) -> str:
        precisions = "/".join(f"{p:.1f}" for p in self.precisions)
        ratio = self.sys_len / self.ref_len if self.ref_len else 0.0
        return (
            f"BLEU = {self.score:.{width}f} {precisions} (BP = {self.bp:.3f} ratio = {ratio:.3f} "
            f"hyp_len = {self.sys_len:d} ref_len = {self.ref_len:d})"
        )


def bleu_corpus(pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> BleuScore:
    """
    Corpus BLEU-4 of already tokenized sentences, with add-one smoothing of every order n >= 2
    (on both matches and totals).
    """
    if not pairs:
        raise EmptyCorpus("Cannot compute BLEU over an empty corpus")
    sys_len = sum(len(hyp) for hyp, _ in pairs)
    ref_len = sum(len(ref) for _, ref in pairs)
    if sys_len == 0:
        return BleuScore(0.0, [0.0] * NGRAM_ORDER, 0.0, sys_len, ref_len)

    bleu = BLEU(max_ngram_order=NGRAM_ORDER, smooth_method="add-k", smooth_value=1, tokenize="none", force=True)
    result = bleu.corpus_score([" ".join(hyp) for hyp, _ in pairs], [[" ".join(ref) for _, ref in pairs]])
    return BleuScore(result.score, list(result.precisions), result.bp, result.sys_len, result.ref_len)
