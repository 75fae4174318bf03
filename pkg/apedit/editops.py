"""
Edit operations over MT hypotheses.

An edit script turns an MT sentence into its post-edited version with 4 kinds of ops:
`KEEP` (copy the current MT word), `DEL` (skip it), `INS|word` (emit a new word) and `EOS`.
Example:
    mt:     The cats is grey
    pe:     The cat is grey .
    script: KEEP DEL INS|cat KEEP KEEP INS|.
"""

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from apedit import env
from apedit.errors import EmptyCorpus, OverrunError, ScriptParseError
from apedit.vocab import PAD, UNK, Vocab

__all__ = (
    "Token",
    "Sentence",
    "Keep",
    "Del",
    "Ins",
    "Eos",
    "EditOp",
    "EditScript",
    "KEEP",
    "DEL",
    "EOS",
    "INS_UNK",
    "OpStats",
    "tokenize",
    "detokenize",
    "op_symbol",
    "parse_op",
    "format_script",
    "parse_script",
    "read_scripts",
    "write_scripts",
    "check_script",
    "extract_ops",
    "apply_ops",
    "script_stats",
    "build_op_vocab",
    "OP_RESERVED",
)

type Token = str
type Sentence = list[str]


def _check_token(word: str):
    if not word:
        raise ValueError("Token must not be empty")
    if any(c.isspace() for c in word):
        raise ValueError(f"Token {word!r} contains whitespace")


@dataclass(frozen=True, slots=True)
class Keep:
    pass


@dataclass(frozen=True, slots=True)
class Del:
    pass


@dataclass(frozen=True, slots=True)
class Ins:
    word: Token

    def __post_init__(self):
        _check_token(self.word)


@dataclass(frozen=True, slots=True)
class Eos:
    pass


type EditOp = Keep | Del | Ins | Eos
type EditScript = list[EditOp]

KEEP = Keep()
DEL = Del()
EOS = Eos()
# Insertion of an out-of-vocabulary word
INS_UNK = Ins(UNK)

_KEEP_SYM = "KEEP"
_DEL_SYM = "DEL"
_EOS_SYM = "EOS"
_INS_PREFIX = "INS|"

# Reserved entries of every op vocabulary, in id order
OP_RESERVED = (PAD, _KEEP_SYM, _DEL_SYM, _EOS_SYM, _INS_PREFIX + UNK)


def tokenize(line: str) -> Sentence:
    return line.split()


def detokenize(sentence: Sequence[Token]) -> str:
    return " ".join(sentence)


def op_symbol(op: EditOp) -> str:
    match op:
        case Keep():
            return _KEEP_SYM
        case Del():
            return _DEL_SYM
        case Eos():
            return _EOS_SYM
        case Ins(word=word):
            return _INS_PREFIX + word
    raise TypeError(f"Not an edit op: {op!r}")


def parse_op(symbol: str) -> EditOp:
    match symbol:
        case "KEEP":
            return KEEP
        case "DEL":
            return DEL
        case "EOS":
            return EOS
        case _ if symbol.startswith(_INS_PREFIX) and len(symbol) > len(_INS_PREFIX):
            return Ins(symbol[len(_INS_PREFIX) :])
    raise ValueError(f"Invalid edit op {symbol!r}")


def check_script(script: Sequence[EditOp]):
    """At most one EOS, and only as the final element."""
    for i, op in enumerate(script):
        if isinstance(op, Eos) and i != len(script) - 1:
            raise ValueError(f"EOS at position {i + 1} is followed by {len(script) - i - 1} ops")


def format_script(script: Sequence[EditOp]) -> str:
    return " ".join(op_symbol(op) for op in script)


def parse_script(line: str, lineno: int = 1) -> EditScript:
    """Parse one serialized script, reporting the 1-based line/column of the first malformed op."""
    script: EditScript = []
    pos = 0
    for symbol in line.split():
        start = line.index(symbol, pos)
        pos = start + len(symbol)
        if script and isinstance(script[-1], Eos):
            raise ScriptParseError(f"op {symbol!r} follows EOS", line=lineno, column=start + 1)
        try:
            script.append(parse_op(symbol))
        except ValueError as e:
            raise ScriptParseError(str(e), line=lineno, column=start + 1) from e
    return script


def read_scripts(path: Path) -> list[EditScript]:
    with path.open(encoding="utf-8") as f:
        return [parse_script(line.rstrip("\n"), lineno=i) for i, line in enumerate(f, start=1)]


def write_scripts(path: Path, scripts: Iterable[Sequence[EditOp]]):
    with path.open("w", encoding="utf-8") as f:
        for script in scripts:
            f.write(format_script(script) + "\n")


def _suffix_distances(mt: Sequence[Token], pe: Sequence[Token]) -> list[list[int]]:
    """
    dist[i][j] is the insertion/deletion distance between mt[i:] and pe[j:]
    (substitutions are not allowed).
    """
    n, m = len(mt), len(pe)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n, -1, -1):
        row, next_row = dist[i], dist[i + 1] if i < n else None
        for j in range(m, -1, -1):
            if i == n:
                row[j] = m - j
            elif j == m:
                row[j] = n - i
            elif mt[i] == pe[j]:
                row[j] = next_row[j + 1]  # type: ignore[index]
            else:
                row[j] = 1 + min(next_row[j], row[j + 1])  # type: ignore[index]
    return dist


def extract_ops(mt: Sequence[Token], pe: Sequence[Token]) -> EditScript:
    """
    Shortest edit path from `mt` to `pe` with KEEP/DEL/INS only.
    Among equal-cost paths, KEEP is preferred over DEL over INS, which puts every DEL of a
    divergent region before its INS ops. The returned script never contains EOS.
    """
    dist = _suffix_distances(mt, pe)
    n, m = len(mt), len(pe)
    i = j = 0
    script: EditScript = []
    while i < n or j < m:
        if i < n and j < m and mt[i] == pe[j] and dist[i][j] == dist[i + 1][j + 1]:
            script.append(KEEP)
            i, j = i + 1, j + 1
        elif i < n and dist[i][j] == dist[i + 1][j] + 1:
            script.append(DEL)
            i += 1
        else:
            script.append(Ins(pe[j]))
            j += 1
    return script


def apply_ops(mt: Sequence[Token], script: Sequence[EditOp], unk_placeholder: str | None = None) -> Sentence:
    """
    Replay `script` on `mt` with a pointer moving left to right.
    EOS, or the end of the script, keeps every remaining MT token.
    Insertions of the unknown word emit `unk_placeholder`.
    """
    _placeholder = unk_placeholder or env.UNK_PLACEHOLDER
    consumed = sum(1 for op in script if isinstance(op, (Keep, Del)))
    if consumed > len(mt):
        raise OverrunError(consumed, len(mt))

    output: Sentence = []
    pointer = 0
    for op in script:
        match op:
            case Keep():
                output.append(mt[pointer])
                pointer += 1
            case Del():
                pointer += 1
            case Ins(word=word):
                output.append(_placeholder if word == UNK else word)
            case Eos():
                break
    output.extend(mt[pointer:])
    return output


@dataclass
class OpStats:
    counts: Counter[str]
    total: int

    def percentage(self, symbol: str) -> float:
        return 100.0 * self.counts.get(symbol, 0) / self.total

    @property
    def percentages(self) -> dict[str, float]:
        return {sym: self.percentage(sym) for sym in self.counts}

    def top(self, n: int = 8) -> list[tuple[str, int, float]]:
        _sorted = sorted(self.counts.items(), key=lambda x: (-x[1], x[0]))[:n]
        return [(sym, count, self.percentage(sym)) for sym, count in _sorted]

    def format(self, n: int = 8) -> str:
        lines = ["Token\tCount\tPercentage"]
        for sym, count, pct in self.top(n):
            # Insertions are shown as the bare word
            _token = sym[len(_INS_PREFIX) :] if sym.startswith(_INS_PREFIX) else sym
            lines.append(f"{_token}\t{count}\t{pct:.1f}%")
        return "\n".join(lines)


def script_stats(scripts: Iterable[Sequence[EditOp]]) -> OpStats:
    counts: Counter[str] = Counter()
    for script in scripts:
        counts.update(op_symbol(op) for op in script)
    total = sum(counts.values())
    if total == 0:
        raise EmptyCorpus("Cannot compute statistics over an empty corpus of scripts")
    return OpStats(counts=counts, total=total)


def build_op_vocab(scripts: Iterable[Sequence[EditOp]], limit: int) -> Vocab:
    """
    Op vocabulary: the reserved PAD/KEEP/DEL/EOS/INS(UNK) symbols, then the most frequent insertions.
    EOS doubles as the decoder start symbol.
    """
    if limit < len(OP_RESERVED):
        raise ValueError(f"Op vocab limit must be >= {len(OP_RESERVED)}, got {limit}")
    nb_scripts = 0
    counts: Counter[str] = Counter()
    for script in scripts:
        nb_scripts += 1
        counts.update(op_symbol(op) for op in script if isinstance(op, Ins))
    if nb_scripts == 0:
        raise EmptyCorpus("Cannot build an op vocabulary from an empty corpus")
    return Vocab.build(
        "ops",
        OP_RESERVED,
        counts,
        limit,
        pad=PAD,
        unk=_INS_PREFIX + UNK,
        bos=_EOS_SYM,
        eos=_EOS_SYM,
    )
