from .corpus import (
    Triple,
    build_word_vocab,
    load_parallel,
    load_triples,
    read_lines,
    split_dev,
    write_lines,
    write_triples,
)
from .filters import FilterRules, coarse_filter
from .lm import LmConfig, TrigramLm, lm_load, lm_save, lm_score, lm_select, lm_train
from .synthetic import gen_synthetic, select_nearest, ter_feature, ter_features, ter_filter
