import unicodedata
from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass

from pydantic import TypeAdapter

__all__ = ("FilterRules", "coarse_filter", "rejection_reason")


@dataclass
class FilterRules:
    """Well-formedness rules for monolingual lines. Each rule can be switched off."""

    min_tokens: int = 3
    max_tokens: int = 80
    min_alpha_ratio: float = 0.7
    check_length: bool = True
    check_alpha: bool = True
    check_control: bool = True
    check_uppercase: bool = True

    def __post_init__(self):
        if not 0 <= self.min_tokens <= self.max_tokens:
            raise ValueError(f"Invalid token range [{self.min_tokens}, {self.max_tokens}]")
        if not 0 <= self.min_alpha_ratio <= 1:
            raise ValueError(f"min_alpha_ratio must be in [0, 1], got {self.min_alpha_ratio}")

    @classmethod
    def from_dict(cls, data: dict) -> "FilterRules":
        return TypeAdapter(cls).validate_python(data)

    def dict(self) -> dict:
        return asdict(self)


def _is_alpha_or_punct(char: str) -> bool:
    return char.isalpha() or unicodedata.category(char).startswith("P")


def rejection_reason(line: str, rules: FilterRules) -> str | None:
    """Name of the first rule `line` breaks, None when it is kept."""
    tokens = line.split()
    if rules.check_length and not rules.min_tokens <= len(tokens) <= rules.max_tokens:
        return "length"
    if rules.check_control and any(unicodedata.category(c) == "Cc" for c in line):
        return "control"
    if rules.check_alpha:
        chars = [c for c in line if not c.isspace()]
        if not chars or sum(_is_alpha_or_punct(c) for c in chars) / len(chars) < rules.min_alpha_ratio:
            return "alpha"
    if rules.check_uppercase and line.isupper():
        return "uppercase"
    return None


def coarse_filter(lines: Iterable[str], rules: FilterRules | None = None) -> Iterator[str]:
    """Yield the lines (without their line break) that pass every enabled rule."""
    _rules = rules or FilterRules()
    for line in lines:
        _line = line.rstrip("\r\n")
        if rejection_reason(_line, _rules) is None:
            yield _line
