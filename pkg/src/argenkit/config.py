"""Shared configuration file for the command-line tools.

An INI document with one section per module, so a run's settings can live
next to its data. Unknown sections or keys are rejected outright; silently
ignoring a typo like `drop_rat` would change results without a trace.
Command-line flags override file values, which override module defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from .codeswitch import CSConfig
from .denoise import CorruptionConfig
from .harness import LengthBins
from .normalize import RULE_NAMES, NormalizationConfig
from .paraphrase import MiningConfig

DEFAULT_VOCAB_SIZE = 8000


@dataclass(frozen=True)
class CliConfig:
    data_dir: "str | None" = None
    seed: int = 0
    vocab_size: int = DEFAULT_VOCAB_SIZE
    normalize: NormalizationConfig = field(default_factory=NormalizationConfig)
    denoise: CorruptionConfig = field(default_factory=CorruptionConfig)
    codeswitch: CSConfig = field(default_factory=CSConfig)
    paraphrase: MiningConfig = field(default_factory=MiningConfig)
    bins: LengthBins = field(default_factory=LengthBins)


def _get_typed(section, key, current):
    if isinstance(current, bool):
        return section.getboolean(key)
    if isinstance(current, int):
        return section.getint(key)
    if isinstance(current, float):
        return section.getfloat(key)
    return section.get(key)


def _fill(section, config_obj, seed=None):
    """Overlay one INI section onto a config dataclass, type-checked against
    the field defaults. The [core] seed seeps into sections that carry a
    seed field but do not set one themselves."""
    fields = {f: getattr(config_obj, f) for f in config_obj.__dataclass_fields__}
    updates = {}
    for key in section:
        if key not in fields:
            raise ValueError(
                f"unknown key {key!r} in section [{section.name}]"
            )
        updates[key] = _get_typed(section, key, fields[key])
    if seed is not None and "seed" in fields and "seed" not in section:
        updates["seed"] = seed
    return replace(config_obj, **updates)


def load_config(path=None) -> CliConfig:
    if path is None:
        return CliConfig()
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ValueError(f"cannot read config file: {path}")

    known = {"core", "normalize", "tokenizer", "denoise", "codeswitch",
             "paraphrase", "harness"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")

    data_dir = None
    seed = 0
    vocab_size = DEFAULT_VOCAB_SIZE
    if parser.has_section("core"):
        core = parser["core"]
        extra = set(core) - {"data_dir", "seed"}
        if extra:
            raise ValueError(f"unknown key(s) in section [core]: {sorted(extra)}")
        data_dir = core.get("data_dir") or None
        seed = core.getint("seed", 0)
    if parser.has_section("tokenizer"):
        tok = parser["tokenizer"]
        extra = set(tok) - {"vocab_size"}
        if extra:
            raise ValueError(f"unknown key(s) in section [tokenizer]: {sorted(extra)}")
        vocab_size = tok.getint("vocab_size", DEFAULT_VOCAB_SIZE)

    cfg = CliConfig(data_dir=data_dir, seed=seed, vocab_size=vocab_size)
    if parser.has_section("normalize"):
        cfg = replace(cfg, normalize=_fill(parser["normalize"], cfg.normalize))
    if parser.has_section("denoise"):
        cfg = replace(cfg, denoise=_fill(parser["denoise"], cfg.denoise, seed))
    else:
        cfg = replace(cfg, denoise=replace(cfg.denoise, seed=seed))
    if parser.has_section("codeswitch"):
        cfg = replace(cfg, codeswitch=_fill(parser["codeswitch"], cfg.codeswitch, seed))
    else:
        cfg = replace(cfg, codeswitch=replace(cfg.codeswitch, seed=seed))
    if parser.has_section("paraphrase"):
        cfg = replace(cfg, paraphrase=_fill(parser["paraphrase"], cfg.paraphrase))
    if parser.has_section("harness"):
        section = parser["harness"]
        extra = set(section) - {"bins"}
        if extra:
            raise ValueError(f"unknown key(s) in section [harness]: {sorted(extra)}")
        if "bins" in section:
            raw = section.get("bins")
            try:
                bounds = tuple(int(b.strip()) for b in raw.split(",") if b.strip())
            except ValueError as exc:
                raise ValueError(f"bad harness bins value: {raw!r}") from exc
            cfg = replace(cfg, bins=LengthBins(bounds))
    return cfg


def rules_from_csv(raw: str) -> set:
    """Parse a --rules style comma list, validating rule names."""
    rules = {r.strip() for r in raw.split(",") if r.strip()}
    unknown = rules - set(RULE_NAMES)
    if unknown:
        raise ValueError(
            f"unknown rules: {sorted(unknown)} (known: {', '.join(RULE_NAMES)})"
        )
    return rules
