from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

__all__ = ("Vocab", "VocabKind", "PAD", "UNK", "BOS", "EOS", "WORD_SPECIALS", "most_frequent")

VocabKind = Literal["words", "ops"]

PAD = "<pad>"
UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"

WORD_SPECIALS = (PAD, UNK, BOS, EOS)

_HEADER_PREFIX = "#apedit-vocab"


def most_frequent(counts: Counter[str], limit: int) -> list[str]:
    """
    Return at most `limit` symbols by decreasing frequency.
    Ties are broken by lexicographic order, so membership at the cap boundary is deterministic.
    """
    if limit <= 0:
        return []
    return [sym for sym, _ in sorted(counts.items(), key=lambda x: (-x[1], x[0]))[:limit]]


@dataclass
class Vocab:
    """
    Bidirectional symbol <-> id map.
    Reserved symbols always come first, in a fixed order, so their ids never change across builds.
    """

    kind: VocabKind
    itos: list[str]
    pad: str
    unk: str
    bos: str
    eos: str
    _stoi: dict[str, int] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self._stoi = {}
        for i, sym in enumerate(self.itos):
            if sym in self._stoi:
                raise ValueError(f"Duplicate symbol {sym!r} in vocab")
            self._stoi[sym] = i
        for special in (self.pad, self.unk, self.bos, self.eos):
            if special not in self._stoi:
                raise ValueError(f"Reserved symbol {special!r} missing from vocab")

    @classmethod
    def build(
        cls,
        kind: VocabKind,
        reserved: Sequence[str],
        counts: Counter[str],
        limit: int,
        *,
        pad: str,
        unk: str,
        bos: str,
        eos: str,
    ) -> "Vocab":
        _counts = Counter({k: v for k, v in counts.items() if k not in reserved})
        return cls(
            kind=kind,
            itos=list(reserved) + most_frequent(_counts, limit - len(reserved)),
            pad=pad,
            unk=unk,
            bos=bos,
            eos=eos,
        )

    @classmethod
    def words(cls, counts: Counter[str], limit: int) -> "Vocab":
        return cls.build("words", WORD_SPECIALS, counts, limit, pad=PAD, unk=UNK, bos=BOS, eos=EOS)

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, sym: str) -> bool:
        return sym in self._stoi

    @property
    def pad_id(self) -> int:
        return self._stoi[self.pad]

    @property
    def unk_id(self) -> int:
        return self._stoi[self.unk]

    @property
    def bos_id(self) -> int:
        return self._stoi[self.bos]

    @property
    def eos_id(self) -> int:
        return self._stoi[self.eos]

    def id(self, sym: str) -> int:
        return self._stoi.get(sym, self.unk_id)

    def encode(self, symbols: Iterable[str]) -> list[int]:
        return [self.id(s) for s in symbols]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.itos[i] for i in ids]

    @property
    def data(self) -> dict:
        return {"kind": self.kind, "itos": self.itos, "pad": self.pad, "unk": self.unk, "bos": self.bos, "eos": self.eos}

    @classmethod
    def from_data(cls, data: dict) -> "Vocab":
        return cls(**data)

    def save(self, path: Path):
        header = f"{_HEADER_PREFIX} kind={self.kind} pad={self.pad} unk={self.unk} bos={self.bos} eos={self.eos}"
        path.write_text("\n".join([header, *self.itos]) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "Vocab":
        header, *symbols = path.read_text(encoding="utf-8").splitlines()
        if not header.startswith(_HEADER_PREFIX):
            raise ValueError(f"{str(path)!r} is not a vocab file (missing {_HEADER_PREFIX!r} header)")
        fields = dict(x.split("=", 1) for x in header.split()[1:])
        return cls(
            kind=fields["kind"],  # type: ignore[arg-type]
            itos=symbols,
            pad=fields["pad"],
            unk=fields["unk"],
            bos=fields["bos"],
            eos=fields["eos"],
        )
