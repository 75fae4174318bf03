from apedit.vocab import Vocab
from .base import VOCAB_ROLES, ApeModel, DecodeContext, LossTerms
from .batch import Batch, Example
from .chained import ChainedModel, forward_chained
from .checkpoint import load_checkpoint, read_header, save_checkpoint
from .config import ModelConfig
from .layers import (
    chained_context,
    decode_step,
    decoder_init,
    encode_bidir,
    forced_attention,
    forced_pointer,
    global_attention,
)
from .mono import MonoSourceModel, forward_mono


def create_model(config: ModelConfig, vocabs: dict[str, Vocab]) -> ApeModel:
    """Instantiate the architecture named by `config` with freshly initialized parameters."""
    unknown = set(vocabs) - set(VOCAB_ROLES)
    if unknown:
        raise ValueError(f"Unknown vocab roles {sorted(unknown)}")
    if config.target_mode == "ops" and vocabs["target"].kind != "ops":
        raise ValueError("target_mode='ops' needs an op vocabulary as target vocab")
    match config.architecture:
        case "chained":
            return ChainedModel(config, vocabs)
        case "mono_source":
            return MonoSourceModel(config, vocabs)
    raise ValueError(f"Unknown architecture {config.architecture!r}")
