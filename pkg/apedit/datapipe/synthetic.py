from collections.abc import Sequence

import numpy as np
from rich.progress import track

from apedit.datapipe.corpus import Triple
from apedit.errors import ApeError, EmptyCorpus, PoolExhausted
from apedit.infer import DEFAULT_MAX_LEN, decode_words
from apedit.logs import logs
from apedit.metrics import TerStats, ter_corpus_stats, ter_sentence
from apedit.model import ApeModel

__all__ = ("DEFAULT_SUBSET_SIZE", "gen_synthetic", "ter_feature", "ter_features", "select_nearest", "ter_filter")

DEFAULT_SUBSET_SIZE = 1000


def gen_synthetic(
    pe_lines: Sequence[Sequence[str]],
    model_pe2src: ApeModel,
    model_pe2mt: ApeModel,
    *,
    max_len: int = DEFAULT_MAX_LEN,
    show_progress: bool = False,
) -> list[Triple]:
    """Back-generate the SRC and MT sides of monolingual PE lines with two words-mode models."""
    triples: list[Triple] = []
    for i, pe in enumerate(track(pe_lines, disable=not show_progress, description="Generating...")):
        try:
            src = decode_words(model_pe2src, pe, max_len)
            mt = decode_words(model_pe2mt, pe, max_len)
        except ApeError as e:
            logs.warning(f"Skipping PE line {i + 1}: {e}")
            continue
        if not src or not mt:
            logs.warning(f"Skipping PE line {i + 1}: empty generated {'source' if not src else 'MT'}")
            continue
        triples.append(Triple(src=src, mt=mt, pe=list(pe)))
    logs.info(f"Generated {len(triples)} synthetic triples from {len(pe_lines)} PE lines")
    return triples


def _feature(stats: TerStats) -> np.ndarray:
    norm = max(stats.ref_len, 1)
    return np.array(
        [stats.insertions / norm, stats.deletions / norm, stats.substitutions / norm, stats.shifts / norm, stats.ter]
    )


def ter_feature(triple: Triple, use_shifts: bool = True) -> np.ndarray:
    """(ins, del, sub, shift) rates and TER of MT against PE, all normalized by the PE length."""
    return _feature(ter_sentence(triple.mt, triple.pe, use_shifts=use_shifts))


def ter_features(triples: Sequence[Triple], use_shifts: bool = True, threads: int = 1) -> np.ndarray:
    stats = ter_corpus_stats([(t.mt, t.pe) for t in triples], use_shifts=use_shifts, threads=threads)
    return np.stack([_feature(s) for s in stats]) if stats else np.zeros((0, 5))


def select_nearest(
    real: np.ndarray,
    pool: np.ndarray,
    target_size: int,
    subset_size: int = DEFAULT_SUBSET_SIZE,
    seed: int = 0,
    *,
    show_progress: bool = False,
) -> list[int]:
    """
    Loop over the real feature vectors. For each, draw `subset_size` pool entries not selected yet and
    take the closest one (Euclidean distance). Returns pool indices in selection order.
    """
    if target_size < 1 or subset_size < 1:
        raise ValueError(f"target_size and subset_size must be >= 1, got {target_size} and {subset_size}")
    if len(real) == 0:
        raise EmptyCorpus("Cannot filter without real examples")
    rng = np.random.default_rng(seed)
    # Unselected indices live in available[:nb_available]
    available = np.arange(len(pool))
    nb_available = len(pool)
    selected: list[int] = []
    for k in track(range(target_size), disable=not show_progress, description="Filtering..."):
        if nb_available == 0:
            raise PoolExhausted(f"Synthetic pool exhausted after {len(selected)} selections (target {target_size})")
        positions = rng.choice(nb_available, size=min(subset_size, nb_available), replace=False)
        distances = np.linalg.norm(pool[available[positions]] - real[k % len(real)], axis=1)
        best = positions[int(np.argmin(distances))]
        selected.append(int(available[best]))
        nb_available -= 1
        available[best] = available[nb_available]
    return selected


def ter_filter(
    real: Sequence[Triple],
    synthetic: Sequence[Triple],
    target_size: int,
    subset_size: int = DEFAULT_SUBSET_SIZE,
    seed: int = 0,
    *,
    use_shifts: bool = True,
    threads: int = 1,
    show_progress: bool = False,
) -> list[Triple]:
    """Select `target_size` synthetic triples whose TER statistics follow the real ones."""
    if target_size > len(synthetic):
        raise PoolExhausted(f"Cannot select {target_size} triples from a pool of {len(synthetic)}")
    real_features = ter_features(real, use_shifts=use_shifts, threads=threads)
    pool_features = ter_features(synthetic, use_shifts=use_shifts, threads=threads)
    indices = select_nearest(
        real_features, pool_features, target_size, subset_size, seed, show_progress=show_progress
    )
    logs.info(f"Selected {len(indices)} of {len(synthetic)} synthetic triples")
    return [synthetic[i] for i in indices]
