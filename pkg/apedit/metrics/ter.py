"""
Translation Edit Rate.

Edits are counted from the hypothesis to the reference: an insertion adds a reference word missing
from the hypothesis, a deletion removes a hypothesis word.
With shifts enabled, block moves of the hypothesis are applied greedily (each costs 1 edit) as long as
they strictly reduce the total number of edits. As in tercom, candidate moves are limited in size, distance
and number, and scored with a beam-limited edit distance.
Against an empty reference every hypothesis word counts as an insertion.
"""

import math
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

from apedit.errors import EmptyCorpus
from apedit.logs import logs

__all__ = (
    "TerStats",
    "ter_sentence",
    "ter_corpus",
    "ter_corpus_stats",
    "ter_from_stats",
    "ter_stats_tsv",
    "MAX_SHIFT_SIZE",
    "MAX_SHIFT_DIST",
    "MAX_SHIFT_CANDIDATES",
    "BEAM_WIDTH",
)

MAX_SHIFT_SIZE = 10
MAX_SHIFT_DIST = 50
MAX_SHIFT_CANDIDATES = 1000
BEAM_WIDTH = 25

_AlignOp = Literal["M", "S", "I", "D"]


@dataclass(frozen=True)
class TerStats:
    insertions: int = 0
    deletions: int = 0
    substitutions: int = 0
    shifts: int = 0
    ref_len: int = 0
    empty_ref: bool = False

    @property
    def edits(self) -> int:
        return self.insertions + self.deletions + self.substitutions + self.shifts

    @property
    def ter(self) -> float:
        return self.edits / max(self.ref_len, 1)

    def tsv(self) -> str:
        return "\t".join(
            str(x)
            for x in (
                self.insertions,
                self.deletions,
                self.substitutions,
                self.shifts,
                self.ref_len,
                f"{self.ter:.4f}",
                int(self.empty_ref),
            )
        )


_TSV_HEADER = "ins\tdel\tsub\tshift\tref_len\tter\tempty_ref"


def _edit_distance(hyp: Sequence[str], ref: Sequence[str]) -> int:
    prev = list(range(len(ref) + 1))
    for i, h in enumerate(hyp, start=1):
        cur = [i] + [0] * len(ref)
        for j, r in enumerate(ref, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (h != r))
        prev = cur
    return prev[-1]


def _beam_edit_distance(hyp: Sequence[str], ref: Sequence[str], beam: int = BEAM_WIDTH) -> float:
    """
    Edit distance restricted to cells within `beam` of the diagonal (scaled to the length ratio).
    Never lower than the exact distance; equal to it whenever the best path stays inside the beam.
    """
    n, m = len(hyp), len(ref)
    if n == 0 or m == 0:
        return float(n + m)
    inf = math.inf
    prev = [float(j) if j <= beam else inf for j in range(m + 1)]
    for i in range(1, n + 1):
        center = round(i * m / n)
        lo, hi = max(0, center - beam), min(m, center + beam)
        cur = [inf] * (m + 1)
        if lo == 0:
            cur[0] = float(i)
        h = hyp[i - 1]
        for j in range(max(1, lo), hi + 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (h != ref[j - 1]))
        prev = cur
    return prev[m]


def _align(hyp: Sequence[str], ref: Sequence[str]) -> list[_AlignOp]:
    """Levenshtein alignment; on ties prefers match/substitution, then deletion, then insertion."""
    n, m = len(hyp), len(ref)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dist[i][j] = min(
                dist[i - 1][j] + 1,
                dist[i][j - 1] + 1,
                dist[i - 1][j - 1] + (hyp[i - 1] != ref[j - 1]),
            )

    ops: list[_AlignOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (hyp[i - 1] != ref[j - 1]):
            ops.append("M" if hyp[i - 1] == ref[j - 1] else "S")
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append("D")
            i -= 1
        else:
            ops.append("I")
            j -= 1
    ops.reverse()
    return ops


def _alignment_maps(ops: Sequence[_AlignOp], ref_len: int) -> tuple[set[int], set[int], list[int]]:
    """
    Hypothesis and reference positions aligned with an identical word, and for every reference
    position (plus the end) the hypothesis position it is aligned with.
    """
    hyp_matched: set[int] = set()
    ref_matched: set[int] = set()
    ref_to_hyp = [0] * (ref_len + 1)
    i = j = 0
    for op in ops:
        if op == "M":
            hyp_matched.add(i)
            ref_matched.add(j)
        if op != "D":
            ref_to_hyp[j] = i
            j += 1
        if op != "I":
            i += 1
    ref_to_hyp[ref_len] = i
    return hyp_matched, ref_matched, ref_to_hyp


def _ref_starts(ref: Sequence[str]) -> dict[tuple[str, ...], list[int]]:
    starts: dict[tuple[str, ...], list[int]] = {}
    for size in range(1, MAX_SHIFT_SIZE + 1):
        for k in range(len(ref) - size + 1):
            starts.setdefault(tuple(ref[k : k + size]), []).append(k)
    return starts


def _shift_candidates(hyp: list[str], ref: Sequence[str]) -> Iterator[tuple[int, int, int]]:
    """
    (start, size, dest) block moves of the hypothesis, in the order they are tried.
    A block must match a reference span somewhere, be not entirely matched already, and is moved next to
    the hypothesis position aligned with that span (`dest` indexes the hypothesis without the block).
    """
    hyp_matched, ref_matched, ref_to_hyp = _alignment_maps(_align(hyp, ref), len(ref))
    ref_starts = _ref_starts(ref)
    for start in range(len(hyp)):
        for size in range(1, min(MAX_SHIFT_SIZE, len(hyp) - start) + 1):
            block = tuple(hyp[start : start + size])
            # Longer blocks starting here cannot match either
            if block not in ref_starts:
                break
            if all(p in hyp_matched for p in range(start, start + size)):
                continue
            seen: set[int] = set()
            for ref_start in ref_starts[block]:
                if all(p in ref_matched for p in range(ref_start, ref_start + size)):
                    continue
                target = ref_to_hyp[ref_start]
                for slot in (target, target + 1, target - 1):
                    # Position in the hypothesis once the block is taken out
                    dest = slot - size if slot > start else slot
                    if dest in seen or dest == start or not 0 <= dest <= len(hyp) - size:
                        continue
                    if abs(dest - start) > MAX_SHIFT_DIST:
                        continue
                    seen.add(dest)
                    yield start, size, dest


def _best_shift(hyp: list[str], ref: Sequence[str], distance: int) -> tuple[list[str], int] | None:
    """
    Find the block shift giving the lowest edit distance among at most MAX_SHIFT_CANDIDATES moves.
    Ties: leftmost source span, then shortest block, then earliest reference match.
    Returns the shifted hypothesis and its edit distance, or None when no shift helps.
    """
    best: tuple[list[str], float] | None = None
    for nb_candidates, (start, size, dest) in enumerate(_shift_candidates(hyp, ref), start=1):
        if nb_candidates > MAX_SHIFT_CANDIDATES:
            break
        rest = hyp[:start] + hyp[start + size :]
        candidate = rest[:dest] + hyp[start : start + size] + rest[dest:]
        new_distance = _beam_edit_distance(candidate, ref)
        if best is None or new_distance < best[1]:
            best = (candidate, new_distance)
    # A shift costs one edit, it must strictly reduce the total
    if best is None or best[1] + 1 >= distance:
        return None
    return best[0], _edit_distance(best[0], ref)


def ter_sentence(hyp: Sequence[str], ref: Sequence[str], use_shifts: bool = True) -> TerStats:
    if not ref:
        logs.warning(f"Empty reference for hypothesis of {len(hyp)} tokens, TER set to {len(hyp)}")
        return TerStats(insertions=len(hyp), ref_len=0, empty_ref=True)

    _hyp = list(hyp)
    shifts = 0
    if use_shifts:
        distance = _edit_distance(_hyp, ref)
        while (shift := _best_shift(_hyp, ref, distance)) is not None:
            _hyp, distance = shift
            shifts += 1

    ops = _align(_hyp, ref)
    return TerStats(
        insertions=ops.count("I"),
        deletions=ops.count("D"),
        substitutions=ops.count("S"),
        shifts=shifts,
        ref_len=len(ref),
    )


def ter_corpus_stats(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]], use_shifts: bool = True, threads: int = 1
) -> list[TerStats]:
    """Per-sentence TER statistics, in input order."""
    if threads <= 1:
        return [ter_sentence(hyp, ref, use_shifts) for hyp, ref in pairs]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(lambda p: ter_sentence(p[0], p[1], use_shifts), pairs))


def ter_corpus(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]], use_shifts: bool = True, threads: int = 1
) -> float:
    """Micro-averaged TER (total edits over total reference length), times 100."""
    if not pairs:
        raise EmptyCorpus("Cannot compute TER over an empty corpus")
    return ter_from_stats(ter_corpus_stats(pairs, use_shifts=use_shifts, threads=threads))


def ter_from_stats(stats: Sequence[TerStats]) -> float:
    return 100.0 * sum(s.edits for s in stats) / sum(max(s.ref_len, 1) for s in stats)


def ter_stats_tsv(stats: Sequence[TerStats]) -> str:
    return "\n".join([_TSV_HEADER, *(s.tsv() for s in stats)]) + "\n"
