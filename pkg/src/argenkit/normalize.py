"""Character-level cleaning for Arabic web and social-media text.

The pipeline masks URLs/user mentions, strips harakat and tatweel, drops
HTML tags and hash signs, and collapses runs of repeated graphemes (so a
string of identical emoji becomes a single one). Every transform is a pure
function and the composed pipeline is idempotent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import regex

URL_TOKEN = "<URL>"
USER_TOKEN = "<USER>"

# Harakat and Quranic marks (fathatan..wavy hamza below) plus superscript alef.
DIACRITICS = frozenset(chr(cp) for cp in range(0x064B, 0x0660)) | {"\u0670"}
TATWEEL = "\u0640"

_DIACRITIC_RE = re.compile("[\u064b-\u065f\u0670]")
_TATWEEL_RE = re.compile("\u0640")

# Scheme-prefixed URLs plus bare www. hosts. Trailing sentence punctuation is
# not part of the match so "see www.x.com." keeps its full stop.
_URL_RE = re.compile(
    r"""(?:https?://[^\s<>]+|(?<![\w.])www\.[^\s<>]+)""", re.IGNORECASE
)
_URL_TRAILING_PUNCT = ".,;:!?\"')]}»؟،؛"

_MENTION_RE = re.compile(r"@\w+")

# An HTML-ish tag: optional slash, ASCII tag name, optional attributes, or a
# comment. The masking tokens <URL>/<USER> are tag-shaped and must survive a
# second pass, so they are explicitly excluded.
_HTML_TAG_RE = re.compile(
    r"<(?!URL>|USER>)/?[A-Za-z][A-Za-z0-9-]*(?:\s[^<>]*)?/?>|<!--.*?-->",
    re.DOTALL,
)

_HASH_RE = re.compile("#")

# \X matches an extended grapheme cluster, so multi-codepoint emoji
# (ZWJ sequences, skin tones, flags) collapse as single units.
_GRAPHEME_RUN_RE = regex.compile(r"(\X)(\1+)")

RULE_NAMES = (
    "strip_diacritics",
    "remove_tatweel",
    "strip_hash_signs",
    "strip_html",
    "mask_urls",
    "mask_mentions",
    "squeeze_repeats",
)


@dataclass(frozen=True)
class NormalizationConfig:
    strip_diacritics: bool = True
    mask_urls: bool = True
    mask_mentions: bool = True
    strip_html: bool = True
    strip_hash_signs: bool = True
    remove_tatweel: bool = True
    squeeze_repeats: bool = True
    repeat_threshold: int = 3

    def __post_init__(self) -> None:
        if self.repeat_threshold < 2:
            raise ValueError(
                f"repeat_threshold must be >= 2, got {self.repeat_threshold}"
            )

    def with_rules(self, rules: set[str]) -> "NormalizationConfig":
        """Return a copy with exactly the named rule flags enabled."""
        unknown = set(rules) - set(RULE_NAMES)
        if unknown:
            raise ValueError(f"unknown rules: {sorted(unknown)}")
        return replace(self, **{name: name in rules for name in RULE_NAMES})


@dataclass(frozen=True)
class CleanText:
    text: str
    applied_rules: tuple[str, ...] = field(default_factory=tuple)


def strip_diacritics(text: str, remove_tatweel: bool = True) -> str:
    """Drop Arabic combining marks (U+064B..065F, U+0670) and, by default,
    tatweel (U+0640). All other codepoints are preserved in order."""
    text = _DIACRITIC_RE.sub("", text)
    if remove_tatweel:
        text = _TATWEEL_RE.sub("", text)
    return text


def mask_entities(text: str, urls: bool = True, mentions: bool = True) -> str:
    """Replace every URL with <URL> and every @-mention with <USER>."""
    if urls:
        text = _URL_RE.sub(_mask_url, text)
    if mentions:
        text = _MENTION_RE.sub(USER_TOKEN, text)
    return text


def _mask_url(match: re.Match) -> str:
    url = match.group(0)
    trailing = ""
    while url and url[-1] in _URL_TRAILING_PUNCT:
        trailing = url[-1] + trailing
        url = url[:-1]
    return URL_TOKEN + trailing


def strip_html(text: str) -> str:
    """Remove spans matching the tag grammar; unbalanced '<' stays literal."""
    return _HTML_TAG_RE.sub("", text)


def strip_hash_signs(text: str) -> str:
    return _HASH_RE.sub("", text)


def strip_markup(text: str) -> str:
    """Remove HTML tags, then delete hash signs (hashtag words are kept)."""
    return strip_hash_signs(strip_html(text))


def squeeze_repeats(text: str, threshold: int = 3) -> str:
    """Collapse every run of >= threshold identical grapheme clusters to one."""
    if threshold < 2:
        raise ValueError(f"threshold must be >= 2, got {threshold}")

    def collapse(match: regex.Match) -> str:
        unit, rest = match.group(1), match.group(2)
        run = 1 + len(rest) // len(unit)
        return unit if run >= threshold else match.group(0)

    return _GRAPHEME_RUN_RE.sub(collapse, text)


def normalize(text: str, config: NormalizationConfig | None = None) -> CleanText:
    """Apply the enabled rules in a fixed order and record which ones ran.

    Deletion rules (diacritics, tatweel, hash signs, tags) run before entity
    masking: a deletion can fuse characters into a URL or mention, so masking
    last is what makes the pipeline idempotent. Repeat squeezing runs at the
    very end so it sees the final character stream.
    """
    if config is None:
        config = NormalizationConfig()
    applied: list[str] = []
    if config.strip_diacritics:
        text = _DIACRITIC_RE.sub("", text)
        applied.append("strip_diacritics")
    if config.remove_tatweel:
        text = _TATWEEL_RE.sub("", text)
        applied.append("remove_tatweel")
    if config.strip_hash_signs:
        text = strip_hash_signs(text)
        applied.append("strip_hash_signs")
    if config.strip_html:
        text = strip_html(text)
        applied.append("strip_html")
    if config.mask_urls or config.mask_mentions:
        text = mask_entities(text, urls=config.mask_urls, mentions=config.mask_mentions)
        if config.mask_urls:
            applied.append("mask_urls")
        if config.mask_mentions:
            applied.append("mask_mentions")
    if config.squeeze_repeats:
        text = squeeze_repeats(text, config.repeat_threshold)
        applied.append("squeeze_repeats")
    return CleanText(text=text, applied_rules=tuple(applied))
