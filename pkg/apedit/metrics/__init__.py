from .bleu import BleuScore, bleu_corpus
from .ter import MAX_SHIFT_SIZE, TerStats, ter_corpus, ter_corpus_stats, ter_from_stats, ter_sentence, ter_stats_tsv
