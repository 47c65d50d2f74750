"""Synthetic code-switching and code-switch measurement.

synthesize replaces random token n-grams with translations obtained through
a TranslatorPort, aiming at a target fraction of covered source tokens.
code_switch_rate measures how much of a text is already non-Arabic script.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

# Arabic block, supplement, and presentation forms A/B.
_ARABIC_RANGES = (
    (0x0600, 0x06FF),
    (0x0750, 0x077F),
    (0xFB50, 0xFDFF),
    (0xFE70, 0xFEFF),
)

DEFAULT_COVERAGE = 0.30


class TranslatorPort(Protocol):
    def translate(self, phrase: str, target_lang: str) -> str: ...


class LidPort(Protocol):
    def detect(self, text: str) -> str: ...


class TranslationError(RuntimeError):
    """Translator failed on a span; carries the span for diagnostics."""

    def __init__(self, message: str, start: int, tokens: tuple):
        super().__init__(message)
        self.start = start
        self.tokens = tokens


@dataclass(frozen=True)
class CSConfig:
    coverage: float = DEFAULT_COVERAGE
    ngram_min: int = 1
    ngram_max: int = 3
    target_lang: str = "en"
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.coverage <= 1.0:
            raise ValueError(f"coverage must be in [0, 1], got {self.coverage}")
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ValueError(
                f"need 1 <= ngram_min <= ngram_max, got "
                f"{self.ngram_min}..{self.ngram_max}"
            )
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class CSExample:
    mixed_tokens: tuple[str, ...]
    replaced_spans: tuple[tuple[int, int, str], ...]
    source_tokens: tuple[str, ...]
    under_coverage: bool = False


def is_arabic_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _ARABIC_RANGES)


def has_arabic(token: str) -> bool:
    return any(is_arabic_char(ch) for ch in token)


def synthesize(
    tokens,
    translator: TranslatorPort,
    config: CSConfig | None = None,
    example_index: int = 0,
) -> CSExample:
    """Replace random non-overlapping n-grams until the covered fraction of
    source tokens reaches config.coverage.

    Span lengths are drawn uniformly from [ngram_min, ngram_max]; a draw
    larger than any remaining gap falls back to the largest length that still
    fits. When nothing fits before coverage is reached, the example comes
    back flagged under_coverage instead of failing.
    """
    if config is None:
        config = CSConfig()
    tokens = tuple(tokens)
    if not tokens:
        raise ValueError("tokens must be non-empty")
    if example_index < 0:
        raise ValueError(f"example_index must be non-negative, got {example_index}")

    rng = np.random.default_rng((config.seed, example_index))
    n = len(tokens)
    covered = [False] * n
    chosen: list[tuple[int, int]] = []
    covered_count = 0
    under = False

    while config.coverage > 0 and covered_count / n < config.coverage:
        gap = _longest_gap(covered)
        if gap < config.ngram_min:
            under = True
            break
        length = int(rng.integers(config.ngram_min, config.ngram_max + 1))
        length = min(length, gap, config.ngram_max)
        starts = [
            s
            for s in range(n - length + 1)
            if not any(covered[s : s + length])
        ]
        start = starts[int(rng.integers(len(starts)))]
        for i in range(start, start + length):
            covered[i] = True
        covered_count += length
        chosen.append((start, length))

    chosen.sort()
    mixed: list[str] = []
    spans: list[tuple[int, int, str]] = []
    pos = 0
    for start, length in chosen:
        mixed.extend(tokens[pos:start])
        phrase = " ".join(tokens[start : start + length])
        span_tokens = tokens[start : start + length]
        try:
            replacement = translator.translate(phrase, config.target_lang)
        except Exception as exc:
            raise TranslationError(
                f"translation failed for span at {start} ({phrase!r}): {exc}",
                start,
                span_tokens,
            ) from exc
        if not replacement.strip():
            raise TranslationError(
                f"translator returned empty output for span at {start} "
                f"({phrase!r})",
                start,
                span_tokens,
            )
        spans.append((start, length, replacement))
        mixed.extend(replacement.split())
        pos = start + length
    mixed.extend(tokens[pos:])

    return CSExample(
        mixed_tokens=tuple(mixed),
        replaced_spans=tuple(spans),
        source_tokens=tokens,
        under_coverage=under,
    )


def _longest_gap(covered) -> int:
    best = run = 0
    for c in covered:
        run = 0 if c else run + 1
        best = max(best, run)
    return best


def code_switch_rate(text: str, arabic_detector=None) -> float:
    """Fraction of whitespace tokens containing no Arabic-script codepoint.

    Empty text is 0.0 by convention.
    """
    detector = arabic_detector if arabic_detector is not None else has_arabic
    toks = text.split()
    if not toks:
        return 0.0
    foreign = sum(1 for t in toks if not detector(t))
    return foreign / len(toks)


@dataclass(frozen=True)
class CSProfile:
    rate: float
    lang_counts: tuple[tuple[str, int], ...]


def code_switch_profile(
    text: str, lid_port: LidPort | None = None, arabic_detector=None
) -> CSProfile:
    """code_switch_rate plus a per-language count of the non-Arabic tokens,
    labelled by the LID port ("unknown" when none is given)."""
    detector = arabic_detector if arabic_detector is not None else has_arabic
    counts: dict[str, int] = {}
    toks = text.split()
    for t in toks:
        if detector(t):
            continue
        lang = lid_port.detect(t) if lid_port is not None else "unknown"
        counts[lang] = counts.get(lang, 0) + 1
    rate = (sum(counts.values()) / len(toks)) if toks else 0.0
    return CSProfile(rate=rate, lang_counts=tuple(sorted(counts.items())))


def has_min_arabic_words(text: str, k: int = 3) -> bool:
    """True iff at least k whitespace tokens contain an Arabic codepoint."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    count = 0
    for tok in text.split():
        if has_arabic(tok):
            count += 1
            if count >= k:
                return True
    return count >= k


class DictTranslator:
    """Dictionary-backed TranslatorPort. Looks up the whole phrase first,
    then falls back to word-by-word lookup; a missing word is an error."""

    def __init__(self, mapping: dict):
        self.mapping = dict(mapping)

    def translate(self, phrase: str, target_lang: str) -> str:
        hit = self.mapping.get(phrase)
        if hit is not None:
            return hit
        out = []
        for word in phrase.split():
            if word not in self.mapping:
                raise KeyError(f"no translation for {word!r}")
            out.append(self.mapping[word])
        return " ".join(out)


def load_dictionary(path) -> dict:
    """Two-column TSV (source phrase, translation) -> mapping."""
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 2 tab-separated columns, "
                    f"got {len(cols)}"
                )
            mapping[cols[0]] = cols[1]
    return mapping
