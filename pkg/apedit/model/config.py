from dataclasses import asdict, dataclass
from typing import Literal

from pydantic import TypeAdapter

from apedit import env

__all__ = ("ModelConfig", "AttentionMode", "Architecture", "TargetMode")

AttentionMode = Literal["global", "forced"]
Architecture = Literal["mono_source", "chained"]
TargetMode = Literal["ops", "words"]


@dataclass
class ModelConfig:
    cell_size: int = 128
    embedding_size: int = 128
    vocab_limit: int = 30_000
    attention_mode: AttentionMode = "forced"
    architecture: Architecture = "mono_source"
    target_mode: TargetMode = "ops"
    maxout_pieces: int = 2
    dropout_p: float = 0.2
    init_scale: float = 0.1
    seed: int = env.DEFAULT_SEED

    def __post_init__(self):
        for name in ("cell_size", "embedding_size", "vocab_limit", "maxout_pieces"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 <= self.dropout_p < 1:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.init_scale <= 0:
            raise ValueError(f"init_scale must be positive, got {self.init_scale}")
        if self.attention_mode == "forced" and self.target_mode != "ops":
            raise ValueError("Forced attention needs target_mode='ops'")
        if self.architecture == "chained" and (self.target_mode != "ops" or self.attention_mode != "forced"):
            raise ValueError("The chained architecture needs target_mode='ops' and attention_mode='forced'")

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return TypeAdapter(cls).validate_python(data)

    def dict(self) -> dict:
        return asdict(self)

    @property
    def name(self) -> str:
        return f"{self.architecture}-{self.attention_mode}-{self.target_mode}"
