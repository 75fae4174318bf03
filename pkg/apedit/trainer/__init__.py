from .batching import build_vocabs, encode_examples, make_batches, oversample_concat, target_symbols
from .config import PRESETS, TrainConfig, decay_interval_examples, decays_per_epoch, learning_rate
from .loop import BEST_CHECKPOINT, LAST_CHECKPOINT, LOG_COLUMNS, TrainState, evaluate, train
