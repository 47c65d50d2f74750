"""Span-corruption pair generation for denoising pretraining.

Each token is dropped independently with a fixed probability, consecutive
drops are merged into one span, and every span is replaced by a sentinel in
the input. The target lists each sentinel followed by the tokens it hides
and ends with one extra terminal sentinel, so corruption is invertible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .tokenizer import sentinel_token

_SENTINEL_RE = re.compile(r"<extra_id_(\d+)>\Z")

DEFAULT_DROP_RATE = 0.15


def sentinel_index(token: str) -> "int | None":
    """Index k for a token of the form <extra_id_k>, else None."""
    m = _SENTINEL_RE.match(token)
    return int(m.group(1)) if m else None


@dataclass(frozen=True)
class CorruptionConfig:
    drop_rate: float = DEFAULT_DROP_RATE
    seed: int = 0
    max_sentinels: int = 100

    def __post_init__(self) -> None:
        if not 0.0 <= self.drop_rate <= 1.0:
            raise ValueError(f"drop_rate must be in [0, 1], got {self.drop_rate}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.max_sentinels < 1:
            raise ValueError(f"max_sentinels must be >= 1, got {self.max_sentinels}")


@dataclass(frozen=True)
class CorruptedExample:
    input_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    dropped_mask: tuple[bool, ...]


def corrupt(
    tokens, config: CorruptionConfig | None = None, example_index: int = 0
) -> CorruptedExample:
    """Corrupt one token sequence.

    The RNG state is derived from (config.seed, example_index), so corpus
    order and worker count never change what a given example produces.
    """
    if config is None:
        config = CorruptionConfig()
    tokens = list(tokens)
    if not tokens:
        raise ValueError("tokens must be non-empty")
    if example_index < 0:
        raise ValueError(f"example_index must be non-negative, got {example_index}")
    for tok in tokens:
        if sentinel_index(tok) is not None:
            raise ValueError(f"input tokens must not contain sentinels: {tok!r}")

    rng = np.random.default_rng((config.seed, example_index))
    mask = rng.random(len(tokens)) < config.drop_rate

    # One pass builds both streams; a drop following a kept token opens a
    # new span and claims the next sentinel index.
    input_tokens: list[str] = []
    target_tokens: list[str] = []
    span = -1
    prev_dropped = False
    for tok, dropped in zip(tokens, mask):
        if dropped:
            if not prev_dropped:
                span += 1
                input_tokens.append(sentinel_token(span))
                target_tokens.append(sentinel_token(span))
            target_tokens.append(tok)
        else:
            input_tokens.append(tok)
        prev_dropped = bool(dropped)

    num_spans = span + 1
    # The terminal sentinel consumes an index too, hence the +1.
    if num_spans + 1 > config.max_sentinels:
        raise ValueError(
            f"{num_spans} corruption spans need {num_spans + 1} sentinel ids, "
            f"more than max_sentinels={config.max_sentinels}"
        )
    target_tokens.append(sentinel_token(num_spans))

    return CorruptedExample(
        input_tokens=tuple(input_tokens),
        target_tokens=tuple(target_tokens),
        dropped_mask=tuple(bool(d) for d in mask),
    )


def reconstruct(example: CorruptedExample) -> tuple:
    """Invert corrupt, returning the original token sequence.

    Raises ValueError on any sentinel mismatch between input and target.
    """
    spans, terminal = _parse_target(example.target_tokens)
    out: list[str] = []
    expected = 0
    for tok in example.input_tokens:
        k = sentinel_index(tok)
        if k is None:
            out.append(tok)
            continue
        if k != expected:
            raise ValueError(
                f"sentinel mismatch: input has {tok}, expected "
                f"{sentinel_token(expected)}"
            )
        out.extend(spans[k])
        expected += 1
    if expected != terminal:
        raise ValueError(
            f"sentinel mismatch: input uses {expected} spans, target carries "
            f"{terminal}"
        )
    return tuple(out)


def _parse_target(target_tokens) -> tuple[dict, int]:
    if not target_tokens:
        raise ValueError("sentinel mismatch: target is empty")
    spans: dict[int, list] = {}
    current: "list | None" = None
    expected = 0
    for tok in target_tokens:
        k = sentinel_index(tok)
        if k is None:
            if current is None:
                raise ValueError("sentinel mismatch: target text before a sentinel")
            current.append(tok)
            continue
        if k != expected:
            raise ValueError(
                f"sentinel mismatch: target has {tok}, expected "
                f"{sentinel_token(expected)}"
            )
        current = spans.setdefault(k, [])
        expected += 1
    terminal = expected - 1
    if spans[terminal]:
        raise ValueError("sentinel mismatch: tokens after the terminal sentinel")
    del spans[terminal]
    return spans, terminal
