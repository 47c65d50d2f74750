"""Paraphrase mining over parallel text.

The pipeline takes (foreign, reference) sentence pairs, machine-translates
the foreign side, then keeps pairs whose semantic similarity sits inside a
band that excludes both weak matches and verbatim copies, and whose surface
overlap is mid-range (too low usually means a bad translation, too high
means a trivial rewrite). Every input pair comes back with a verdict; the
miner never drops rows.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol

from .codeswitch import TranslatorPort
from .normalize import normalize

VERDICTS = (
    "accepted",
    "sim_too_low",
    "sim_identical",
    "overlap_low",
    "overlap_high",
    "error",
)


class SimilarityPort(Protocol):
    def score(self, a: str, b: str) -> float: ...


class TokenCosineScorer:
    """Deterministic SimilarityPort stand-in: cosine over normalized token
    count vectors. Not a semantic model; it exists so the pipeline can run
    end to end without one."""

    def score(self, a: str, b: str) -> float:
        ca = Counter(normalize(a).text.split())
        cb = Counter(normalize(b).text.split())
        if not ca and not cb:
            return 1.0
        if not ca or not cb:
            return 0.0
        dot = sum(c * cb[t] for t, c in ca.items())
        norm = math.sqrt(sum(c * c for c in ca.values()))
        norm *= math.sqrt(sum(c * c for c in cb.values()))
        return dot / norm


@dataclass(frozen=True)
class MiningConfig:
    sim_min: float = 0.70
    sim_max: float = 0.99
    ov_min: float = 0.35
    ov_max: float = 0.70

    def __post_init__(self) -> None:
        for lo, hi, name in (
            (self.sim_min, self.sim_max, "sim"),
            (self.ov_min, self.ov_max, "overlap"),
        ):
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(
                    f"need 0 <= {name}_min <= {name}_max <= 1, got {lo}..{hi}"
                )


@dataclass(frozen=True)
class CandidatePair:
    side_a: str
    side_b: str
    similarity: "float | None"
    overlap: "float | None"
    verdict: str
    detail: "str | None" = None


def _overlap_tokens(text: str) -> frozenset:
    return frozenset(normalize(text).text.split())


def unigram_overlap(a: str, b: str) -> float:
    """Jaccard ratio of the unique whitespace tokens of the two normalized
    sides. Two empty token sets count as fully overlapping."""
    ta, tb = _overlap_tokens(a), _overlap_tokens(b)
    if not ta and not tb:
        return 1.0
    return len(ta & tb) / len(ta | tb)


def judge(similarity: float, overlap: float, config: MiningConfig) -> str:
    """Gate predicate. The similarity band is checked first, then overlap;
    all bounds inclusive. Above sim_max counts as a near-identical pair."""
    if similarity < config.sim_min:
        return "sim_too_low"
    if similarity > config.sim_max:
        return "sim_identical"
    if overlap < config.ov_min:
        return "overlap_low"
    if overlap > config.ov_max:
        return "overlap_high"
    return "accepted"


def mine(
    parallel_pairs,
    translator: TranslatorPort,
    scorer: SimilarityPort,
    config: MiningConfig | None = None,
    target_lang: str = "ar",
    jobs: int = 1,
) -> list[CandidatePair]:
    """Run the translate/score/gate pipeline over (foreign, reference) pairs.

    Output order matches input order even when jobs > 1. Translator or
    scorer failures become verdict "error" on that pair; the rest of the
    batch is unaffected.
    """
    if config is None:
        config = MiningConfig()
    pairs = list(parallel_pairs)

    def work(pair) -> CandidatePair:
        foreign, reference = pair
        try:
            translated = translator.translate(foreign, target_lang)
            similarity = float(scorer.score(reference, translated))
        except Exception as exc:
            return CandidatePair(
                side_a=reference,
                side_b="",
                similarity=None,
                overlap=None,
                verdict="error",
                detail=str(exc),
            )
        overlap = unigram_overlap(reference, translated)
        return CandidatePair(
            side_a=reference,
            side_b=translated,
            similarity=similarity,
            overlap=overlap,
            verdict=judge(similarity, overlap, config),
        )

    if jobs <= 1 or len(pairs) <= 1:
        return [work(p) for p in pairs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, pairs))


def split_dataset(records, ratios=(0.8, 0.1, 0.1), seed: int = 0):
    """Deterministically shuffle and partition records into three splits.

    Boundary indices are the half-up-rounded cumulative ratios, so a 10-row
    input at 0.8/0.1/0.1 lands as sizes (8, 1, 1).
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValueError(f"need exactly 3 ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be non-negative, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    records = list(records)
    random.Random(seed).shuffle(records)
    n = len(records)
    cuts = []
    acc = 0.0
    for r in ratios[:-1]:
        acc += r
        cuts.append(int(acc * n + 0.5))
    cuts.append(n)
    train = records[: cuts[0]]
    dev = records[cuts[0] : cuts[1]]
    test = records[cuts[1] : cuts[2]]
    return train, dev, test
