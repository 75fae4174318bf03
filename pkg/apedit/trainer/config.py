import math
from dataclasses import asdict, dataclass, replace
from typing import Literal

from pydantic import TypeAdapter

from apedit import env

__all__ = ("TrainConfig", "Preset", "PRESETS", "learning_rate", "decay_interval_examples", "decays_per_epoch")

Preset = Literal["real", "synthetic"]

# decay factor, decay interval in epochs
PRESETS: dict[str, tuple[float, float]] = {
    "real": (0.8, 1.0),
    "synthetic": (0.5, 0.5),
}


@dataclass
class TrainConfig:
    batch_size: int = 32
    initial_lr: float = 1.0
    decay_factor: float = 0.8
    # In epochs of the (possibly oversampled) training corpus
    decay_interval: float = 1.0
    eval_every_steps: int = 200
    max_steps: int = 120_000
    # Evaluations without improvement before stopping, None to disable
    patience: int | None = 20
    clip_norm: float | None = None
    max_extra: int = 50
    seed: int = env.DEFAULT_SEED

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 < self.decay_factor <= 1:
            raise ValueError(f"decay_factor must be in (0, 1], got {self.decay_factor}")
        if self.decay_interval <= 0:
            raise ValueError(f"decay_interval must be positive, got {self.decay_interval}")
        if self.initial_lr <= 0:
            raise ValueError(f"initial_lr must be positive, got {self.initial_lr}")
        if self.eval_every_steps < 1 or self.max_steps < 1:
            raise ValueError("eval_every_steps and max_steps must be >= 1")
        if self.patience is not None and self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        return TypeAdapter(cls).validate_python(data)

    @classmethod
    def preset(cls, name: Preset, **overrides) -> "TrainConfig":
        """Decay schedule of real APE data (x0.8 every epoch) or synthetic data (x0.5 every half epoch)."""
        if name not in PRESETS:
            raise ValueError(f"Unknown preset {name!r}, expected one of {list(PRESETS)}")
        factor, interval = PRESETS[name]
        return cls.from_dict({"decay_factor": factor, "decay_interval": interval, **overrides})

    def with_preset(self, name: Preset) -> "TrainConfig":
        factor, interval = PRESETS[name]
        return replace(self, decay_factor=factor, decay_interval=interval)

    def dict(self) -> dict:
        return asdict(self)


def decay_interval_examples(config: TrainConfig, corpus_size: int) -> int:
    """Number of examples between two decays; half an epoch of an odd corpus is floor(size / 2)."""
    return max(1, math.floor(corpus_size * config.decay_interval))


def decays_per_epoch(config: TrainConfig) -> int | None:
    """Whole number of decays in one epoch, None for intervals longer than an epoch."""
    if config.decay_interval > 1:
        return None
    return max(1, round(1 / config.decay_interval))


def learning_rate(config: TrainConfig, examples_seen: int, corpus_size: int) -> float:
    """
    Decays are counted per completed epoch, plus the intervals already passed in the current one, so an
    odd corpus still gets exactly `1 / decay_interval` decays per epoch.
    """
    interval = decay_interval_examples(config, corpus_size)
    per_epoch = decays_per_epoch(config)
    if per_epoch is None or corpus_size < 1:
        decays = examples_seen // interval
    else:
        epochs, offset = divmod(examples_seen, corpus_size)
        decays = epochs * per_epoch + min(per_epoch - 1, offset // interval)
    return config.initial_lr * config.decay_factor**decays
