"""Trainable byte-level BPE subword model with special-token support.

Pieces are byte strings kept as latin-1 text (one char per byte), so any
UTF-8 input is encodable via the 256 byte-fallback pieces and decoding is an
exact inverse. Special tokens sit at the lowest ids and are matched as whole
literals before byte merging ever sees the text.

Merges never cross a whitespace boundary: text is pre-split into runs of
non-space and space characters, which is what marks word-initial pieces.
A visible meta prefix symbol would break the exact-roundtrip guarantee on
inputs that contain the marker or unusual whitespace, so none is used.
"""

from __future__ import annotations

import heapq
import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field

MODEL_VERSION = 1

BYTE_PIECES = tuple(chr(b) for b in range(256))

_CHUNK_RE = re.compile(r"\S+|\s+")


def sentinel_token(k: int) -> str:
    return f"<extra_id_{k}>"


def default_specials(num_sentinels: int = 100) -> tuple[str, ...]:
    """Reserved vocabulary: padding/unknown, masking tokens, sentinel family."""
    base = ("<pad>", "<unk>", "<URL>", "<USER>")
    return base + tuple(sentinel_token(k) for k in range(num_sentinels))


@dataclass(frozen=True)
class SubwordModel:
    pieces: tuple[str, ...]
    merges: tuple[tuple[str, str], ...]
    specials: tuple[str, ...]
    version: int = MODEL_VERSION
    _piece_to_id: dict = field(init=False, repr=False, compare=False)
    _merge_rank: dict = field(init=False, repr=False, compare=False)
    _special_re: "re.Pattern | None" = field(init=False, repr=False, compare=False)
    _chunk_cache: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_piece_to_id", {p: i for i, p in enumerate(self.pieces)}
        )
        object.__setattr__(
            self, "_merge_rank", {pair: r for r, pair in enumerate(self.merges)}
        )
        pattern = None
        if self.specials:
            # Longest alternative first so <extra_id_10> beats <extra_id_1>.
            ordered = sorted(self.specials, key=len, reverse=True)
            pattern = re.compile("|".join(re.escape(s) for s in ordered))
        object.__setattr__(self, "_special_re", pattern)
        object.__setattr__(self, "_chunk_cache", {})

    @property
    def vocab_size(self) -> int:
        return len(self.pieces)

    def id_for(self, piece: str) -> int:
        return self._piece_to_id[piece]


@dataclass(frozen=True)
class EncodedSeq:
    ids: tuple[int, ...]
    offsets: tuple[tuple[int, int], ...]


def _segments(model: SubwordModel, text: str):
    """Yield (substring, is_special) covering text left to right."""
    if model._special_re is None:
        if text:
            yield text, False
        return
    pos = 0
    for m in model._special_re.finditer(text):
        if m.start() > pos:
            yield text[pos : m.start()], False
        yield m.group(0), True
        pos = m.end()
    if pos < len(text):
        yield text[pos:], False


def _encode_chunk(model: SubwordModel, chunk: str) -> tuple[str, ...]:
    cached = model._chunk_cache.get(chunk)
    if cached is not None:
        return cached
    syms = [chr(b) for b in chunk.encode("utf-8")]
    ranks = model._merge_rank
    while len(syms) > 1:
        best_rank = None
        for pair in zip(syms, syms[1:]):
            r = ranks.get(pair)
            if r is not None and (best_rank is None or r < best_rank):
                best_rank = r
        if best_rank is None:
            break
        a, b = model.merges[best_rank]
        syms = _merge_symbols(syms, a, b)
    result = tuple(syms)
    model._chunk_cache[chunk] = result
    return result


def _merge_symbols(syms: list, a: str, b: str) -> list:
    out = []
    i = 0
    while i < len(syms):
        if i + 1 < len(syms) and syms[i] == a and syms[i + 1] == b:
            out.append(a + b)
            i += 2
        else:
            out.append(syms[i])
            i += 1
    return out


def encode(model: SubwordModel, text: str) -> EncodedSeq:
    """Tokenize text to ids plus (start, end) byte spans into its UTF-8 form.

    Specials are taken as whole literals; everything else goes through the
    merge list in training order, with byte fallback for unseen content.
    """
    ids: list[int] = []
    offsets: list[tuple[int, int]] = []
    to_id = model._piece_to_id
    pos = 0
    for seg, is_special in _segments(model, text):
        if is_special:
            n = len(seg.encode("utf-8"))
            ids.append(to_id[seg])
            offsets.append((pos, pos + n))
            pos += n
            continue
        for chunk in _CHUNK_RE.findall(seg):
            for piece in _encode_chunk(model, chunk):
                ids.append(to_id[piece])
                offsets.append((pos, pos + len(piece)))
                pos += len(piece)
    return EncodedSeq(ids=tuple(ids), offsets=tuple(offsets))


def decode(model: SubwordModel, ids) -> str:
    """Exact inverse of encode. Unknown ids raise; stray byte sequences that
    do not form valid UTF-8 decode with replacement characters."""
    n_special = len(model.specials)
    parts: list[str] = []
    buf: list[str] = []

    def flush():
        if buf:
            raw = "".join(buf).encode("latin-1")
            parts.append(raw.decode("utf-8", errors="replace"))
            buf.clear()

    for i in ids:
        if not isinstance(i, int) or not 0 <= i < len(model.pieces):
            raise ValueError(f"unknown piece id: {i!r}")
        if i < n_special:
            flush()
            parts.append(model.pieces[i])
        else:
            buf.append(model.pieces[i])
    flush()
    return "".join(parts)


def train(corpus, target_size: int, specials=None) -> SubwordModel:
    """Learn a BPE merge list from an iterable of strings.

    Deterministic: at each step the highest-count adjacent pair wins, ties
    broken by lexicographic order of (left, right). Stops at target_size or
    when no pair occurs at least twice.
    """
    specials = tuple(specials) if specials is not None else default_specials()
    if len(set(specials)) != len(specials):
        raise ValueError("duplicate special tokens")
    if any(not s for s in specials):
        raise ValueError("special tokens must be non-empty")
    floor = len(specials) + 256
    if target_size < floor:
        raise ValueError(
            f"target_size {target_size} is below the floor {floor} "
            f"({len(specials)} specials + 256 byte pieces)"
        )

    seed_model = SubwordModel(
        pieces=specials + BYTE_PIECES, merges=(), specials=specials
    )
    chunk_freq: Counter = Counter()
    for line in corpus:
        for seg, is_special in _segments(seed_model, line):
            if is_special:
                continue
            chunk_freq.update(_CHUNK_RE.findall(seg))
    if not chunk_freq:
        raise ValueError("empty training corpus")

    words = []
    freqs = []
    for chunk, f in chunk_freq.items():
        words.append([chr(b) for b in chunk.encode("utf-8")])
        freqs.append(f)

    pair_counts: Counter = Counter()
    pair_words: defaultdict = defaultdict(set)
    for wi, syms in enumerate(words):
        f = freqs[wi]
        for pair in zip(syms, syms[1:]):
            pair_counts[pair] += f
            pair_words[pair].add(wi)

    # Lazy-deletion heap: entries go stale when counts change, so each pop is
    # validated against pair_counts before use.
    heap = [(-c, pair) for pair, c in pair_counts.items()]
    heapq.heapify(heap)
    taken = set(specials) | set(BYTE_PIECES)
    merges: list[tuple[str, str]] = []
    budget = target_size - floor

    while len(merges) < budget and heap:
        neg, pair = heapq.heappop(heap)
        if pair_counts.get(pair, 0) != -neg:
            continue
        if -neg < 2:
            break
        a, b = pair
        new_piece = a + b
        if new_piece in taken:
            # Merging would collide with a special or existing piece; the
            # pair is permanently ineligible.
            del pair_counts[pair]
            continue
        merges.append(pair)
        taken.add(new_piece)

        changed: set = set()
        for wi in list(pair_words[pair]):
            syms = words[wi]
            f = freqs[wi]
            has_pair = any(
                syms[i] == a and syms[i + 1] == b for i in range(len(syms) - 1)
            )
            if not has_pair:
                pair_words[pair].discard(wi)
                continue
            for old in zip(syms, syms[1:]):
                pair_counts[old] -= f
                changed.add(old)
            merged = _merge_symbols(syms, a, b)
            words[wi] = merged
            for new in zip(merged, merged[1:]):
                pair_counts[new] += f
                pair_words[new].add(wi)
                changed.add(new)
        for p in changed:
            c = pair_counts.get(p, 0)
            if c <= 0:
                pair_counts.pop(p, None)
            else:
                heapq.heappush(heap, (-c, p))

    pieces = specials + BYTE_PIECES + tuple(a + b for a, b in merges)
    return SubwordModel(pieces=pieces, merges=tuple(merges), specials=specials)


def model_to_dict(model: SubwordModel) -> dict:
    return {
        "pieces": list(model.pieces),
        "merges": [list(pair) for pair in model.merges],
        "specials": list(model.specials),
        "version": model.version,
    }


def model_from_dict(doc: dict) -> SubwordModel:
    if not isinstance(doc, dict):
        raise ValueError("model document must be a JSON object")
    missing = {"pieces", "merges", "specials", "version"} - set(doc)
    if missing:
        raise ValueError(f"model document missing keys: {sorted(missing)}")
    if doc["version"] != MODEL_VERSION:
        raise ValueError(f"unsupported model version: {doc['version']!r}")
    pieces = tuple(doc["pieces"])
    specials = tuple(doc["specials"])
    merges = tuple((a, b) for a, b in doc["merges"])
    n = len(specials)
    if pieces[:n] != specials:
        raise ValueError("specials must occupy the lowest piece ids")
    if pieces[n : n + 256] != BYTE_PIECES:
        raise ValueError("byte fallback pieces missing or out of order")
    if len(set(pieces)) != len(pieces):
        raise ValueError("duplicate pieces")
    tail = pieces[n + 256 :]
    if len(tail) != len(merges) or any(
        tail[i] != a + b for i, (a, b) in enumerate(merges)
    ):
        raise ValueError("merge list does not match piece list")
    return SubwordModel(pieces=pieces, merges=merges, specials=specials)


def save(model: SubwordModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, ensure_ascii=True)
        fh.write("\n")


def load(path) -> SubwordModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
