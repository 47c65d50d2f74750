"""Dataset registry, task-aware evaluation, and report generation.

Datasets are declared as one JSON document each under <data_dir>/registry/.
Every task has a fixed metric set; scores come back on the 0-100 scale used
in result tables. Completed runs are appended to <data_dir>/runs.jsonl, and
a test split can only be scored once per model unless forced, which keeps
dev-time model selection honest.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import metrics
from .normalize import normalize

TASKS = (
    "mt",
    "cst",
    "summarization",
    "ntg",
    "qg",
    "transliteration",
    "paraphrase",
    "classification",
    "qa",
)

TASK_ALIASES = {"tr": "transliteration", "pph": "paraphrase", "cls": "classification"}

BLEU_TASKS = ("mt", "cst", "ntg", "qg", "transliteration", "paraphrase")

FORMATS = ("tsv-parallel", "jsonl")

RUNS_FILE = "runs.jsonl"

_SPLIT_NAME_RE = re.compile(r"(train|dev|test(_\w+)?)\Z")

_SPEC_KEYS = {"id", "task", "format", "splits", "language_pair", "group"}


class DuplicateTestRunError(RuntimeError):
    """A model already has a recorded evaluation on this test split."""


def canonical_task(task: str) -> str:
    task = TASK_ALIASES.get(task, task)
    if task not in TASKS:
        raise ValueError(f"unknown task: {task!r} (expected one of {TASKS})")
    return task


def metric_set(task: str) -> tuple[str, ...]:
    task = canonical_task(task)
    if task in BLEU_TASKS:
        return ("bleu",)
    if task == "summarization":
        return ("rouge1", "rouge2", "rougeL")
    if task == "classification":
        return ("acc", "macro_f1")
    return ("em", "f1")


def data_root(path=None) -> Path:
    """Root for all relative paths: explicit arg, else ARGENKIT_DATA_DIR,
    else the working directory."""
    return Path(path or os.environ.get("ARGENKIT_DATA_DIR") or ".")


@dataclass(frozen=True)
class DatasetSpec:
    id: str
    task: str
    format: str
    splits: tuple[tuple[str, str], ...]
    language_pair: "str | None" = None
    group: "str | None" = None

    def split_path(self, split: str) -> str:
        for name, path in self.splits:
            if name == split:
                return path
        raise ValueError(f"dataset {self.id!r} has no split {split!r}")

    @property
    def split_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.splits)


def spec_from_dict(doc: dict) -> DatasetSpec:
    if not isinstance(doc, dict):
        raise ValueError("dataset spec must be a JSON object")
    unknown = set(doc) - _SPEC_KEYS
    if unknown:
        raise ValueError(f"unknown dataset spec keys: {sorted(unknown)}")
    missing = {"id", "task", "format", "splits"} - set(doc)
    if missing:
        raise ValueError(f"dataset spec missing keys: {sorted(missing)}")
    if not doc["id"]:
        raise ValueError("dataset id must be non-empty")
    task = canonical_task(doc["task"])
    if doc["format"] not in FORMATS:
        raise ValueError(f"unknown format: {doc['format']!r} (expected {FORMATS})")
    splits = doc["splits"]
    if not isinstance(splits, dict) or not splits:
        raise ValueError("splits must be a non-empty object of name -> file")
    for name in splits:
        if not _SPLIT_NAME_RE.fullmatch(name):
            raise ValueError(
                f"bad split name {name!r}: expected train, dev, test, or test_*"
            )
    return DatasetSpec(
        id=doc["id"],
        task=task,
        format=doc["format"],
        splits=tuple(sorted(splits.items())),
        language_pair=doc.get("language_pair"),
        group=doc.get("group"),
    )


def spec_to_dict(spec: DatasetSpec) -> dict:
    doc = {
        "id": spec.id,
        "task": spec.task,
        "format": spec.format,
        "splits": dict(spec.splits),
    }
    if spec.language_pair is not None:
        doc["language_pair"] = spec.language_pair
    if spec.group is not None:
        doc["group"] = spec.group
    return doc


def load_registry(data_dir=None) -> dict:
    root = data_root(data_dir) / "registry"
    registry: dict[str, DatasetSpec] = {}
    if not root.is_dir():
        return registry
    for path in sorted(root.glob("*.json")):
        with open(path, encoding="utf-8-sig") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: invalid JSON: {exc}") from exc
        spec = spec_from_dict(doc)
        if spec.id in registry:
            raise ValueError(f"{path}: duplicate dataset id {spec.id!r}")
        registry[spec.id] = spec
    return registry


def save_spec(spec: DatasetSpec, data_dir=None) -> Path:
    root = data_root(data_dir) / "registry"
    root.mkdir(parents=True, exist_ok=True)
    path = root / f"{spec.id}.json"
    _atomic_write(path, json.dumps(spec_to_dict(spec), ensure_ascii=False, indent=2) + "\n")
    return path


def _atomic_write(path: Path, content: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_lines(path) -> list[str]:
    # utf-8-sig strips a leading BOM, if any, and keeps everything else.
    with open(path, encoding="utf-8-sig") as fh:
        return fh.read().splitlines()


def load_dataset(spec: DatasetSpec, data_dir=None) -> dict:
    """Materialize every split into a list of record dicts.

    tsv-parallel rows become {"source", "target"}; jsonl rows must be
    objects. Malformed rows fail with the file and line number."""
    root = data_root(data_dir)
    out: dict[str, list] = {}
    for split, rel in spec.splits:
        path = Path(rel)
        if not path.is_absolute():
            path = root / path
        lines = read_lines(path)
        records = []
        if spec.format == "tsv-parallel":
            for lineno, line in enumerate(lines, 1):
                cols = line.split("\t")
                if len(cols) != 2:
                    raise ValueError(
                        f"{path}:{lineno}: expected 2 tab-separated columns, "
                        f"got {len(cols)}"
                    )
                records.append({"source": cols[0], "target": cols[1]})
        else:
            for lineno, line in enumerate(lines, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
                if not isinstance(rec, dict):
                    raise ValueError(f"{path}:{lineno}: record must be an object")
                records.append(rec)
        out[split] = records
    return out


@dataclass
class EvalRun:
    model_id: str
    dataset_id: str
    split: str
    hypotheses: str = ""
    scores: dict = field(default_factory=dict)
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "dataset_id": self.dataset_id,
            "split": self.split,
            "hypotheses": self.hypotheses,
            "scores": dict(self.scores),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalRun":
        return cls(
            model_id=doc["model_id"],
            dataset_id=doc["dataset_id"],
            split=doc["split"],
            hypotheses=doc.get("hypotheses", ""),
            scores=dict(doc.get("scores", {})),
            timestamp=doc.get("timestamp", ""),
        )


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values)


def score_pairs(task: str, hypotheses, references) -> dict:
    """Dispatch to the task's metric set; all values on the 0-100 scale.

    Text metrics tokenize by whitespace after the default normalization
    pass, so cosmetic differences (diacritics, elongation) do not move
    scores."""
    task = canonical_task(task)
    hypotheses = list(hypotheses)
    references = list(references)
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise ValueError("need at least one hypothesis/reference pair")

    if task in BLEU_TASKS:
        hyp_toks = [normalize(h).text.split() for h in hypotheses]
        ref_toks = [normalize(r).text.split() for r in references]
        return {"bleu": metrics.bleu(hyp_toks, ref_toks).score}
    if task == "summarization":
        pairs = [
            (normalize(h).text, normalize(r).text)
            for h, r in zip(hypotheses, references)
        ]
        return {
            "rouge1": _mean(metrics.rouge_n(h, r, 1).f1 for h, r in pairs) * 100,
            "rouge2": _mean(metrics.rouge_n(h, r, 2).f1 for h, r in pairs) * 100,
            "rougeL": _mean(metrics.rouge_l(h, r).f1 for h, r in pairs) * 100,
        }
    if task == "classification":
        pairs = [(h.strip(), r.strip()) for h, r in zip(hypotheses, references)]
        return {
            "acc": metrics.accuracy(pairs) * 100,
            "macro_f1": metrics.macro_f1(pairs) * 100,
        }
    return {
        "em": _mean(metrics.exact_match(h, r) for h, r in zip(hypotheses, references))
        * 100,
        "f1": _mean(metrics.qa_token_f1(h, r) for h, r in zip(hypotheses, references))
        * 100,
    }


def evaluate_run(
    run: EvalRun, spec: DatasetSpec, records, hyp_lines=None, data_dir=None
) -> dict:
    """Score a run against one materialized split and stamp the run record."""
    references = []
    for i, rec in enumerate(records):
        if "target" not in rec:
            raise ValueError(f"record {i} has no 'target' field")
        references.append(str(rec["target"]))
    if hyp_lines is None:
        path = Path(run.hypotheses)
        if not path.is_absolute():
            path = data_root(data_dir) / path
        hyp_lines = read_lines(path)
    if len(hyp_lines) != len(references):
        raise ValueError(
            f"{len(hyp_lines)} hypotheses vs {len(references)} references "
            f"in {spec.id}/{run.split}"
        )
    run.scores = score_pairs(spec.task, hyp_lines, references)
    run.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return run.scores


def is_test_split(split: str) -> bool:
    return split == "test" or split.startswith("test_")


def load_runs(data_dir=None) -> list:
    path = data_root(data_dir) / RUNS_FILE
    if not path.exists():
        return []
    runs = []
    for lineno, line in enumerate(read_lines(path), 1):
        if not line.strip():
            continue
        try:
            runs.append(EvalRun.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValueError(f"{path}:{lineno}: bad run record: {exc}") from exc
    return runs


def record_run(run: EvalRun, data_dir=None, force: bool = False) -> None:
    """Append a completed run to the log, enforcing blind-test discipline:
    one recorded evaluation per (model, dataset, test split) unless forced."""
    root = data_root(data_dir)
    runs = load_runs(root)
    if is_test_split(run.split) and not force:
        for prior in runs:
            if (
                prior.model_id == run.model_id
                and prior.dataset_id == run.dataset_id
                and prior.split == run.split
            ):
                raise DuplicateTestRunError(
                    f"{run.model_id} was already evaluated on "
                    f"{run.dataset_id}/{run.split} at {prior.timestamp}; "
                    f"pass force to repeat a blind test"
                )
    runs.append(run)
    content = "".join(json.dumps(r.to_dict(), ensure_ascii=False) + "\n" for r in runs)
    root.mkdir(parents=True, exist_ok=True)
    _atomic_write(root / RUNS_FILE, content)


@dataclass(frozen=True)
class LengthBins:
    boundaries: tuple[int, ...] = (10, 20)

    def __post_init__(self) -> None:
        bs = tuple(int(b) for b in self.boundaries)
        object.__setattr__(self, "boundaries", bs)
        if not bs:
            raise ValueError("need at least one boundary")
        if bs[0] < 1 or any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
            raise ValueError(
                f"boundaries must be ascending positive integers, got {bs}"
            )

    def _starts(self) -> list:
        # Bin 0 is [0, b0); bin 1 owns both of its edges ([b0, b1]); later
        # bins give their lower edge to the bin below: (b1, b2], ...
        starts = [0, self.boundaries[0]]
        starts.extend(b + 1 for b in self.boundaries[1:])
        return starts

    def index(self, length: int) -> int:
        if length < 0:
            raise ValueError(f"length must be non-negative, got {length}")
        starts = self._starts()
        for i in range(len(starts) - 1, -1, -1):
            if length >= starts[i]:
                return i
        raise AssertionError("unreachable")

    @property
    def labels(self) -> tuple[str, ...]:
        bs = self.boundaries
        out = [f"<{bs[0]}"]
        starts = self._starts()
        for i in range(1, len(starts) - 1):
            out.append(f"{starts[i]}-{bs[i]}")
        last_start = starts[-1]
        if last_start - 1 in bs:
            out.append(f">{last_start - 1}")
        else:
            out.append(f">={last_start}")
        return tuple(out)


@dataclass(frozen=True)
class BinScores:
    label: str
    count: int
    scores: dict


def length_binned(triples, bins: LengthBins = None, task: str = "mt") -> list:
    """Score (source, reference, hypothesis) triples per source-length bin.

    Every bin appears in the output; empty bins report count 0 and no
    scores."""
    if bins is None:
        bins = LengthBins()
    labels = bins.labels
    buckets: list[tuple[list, list]] = [([], []) for _ in labels]
    for source, reference, hypothesis in triples:
        i = bins.index(len(source.split()))
        buckets[i][0].append(hypothesis)
        buckets[i][1].append(reference)
    out = []
    for label, (hyps, refs) in zip(labels, buckets):
        scores = score_pairs(task, hyps, refs) if hyps else {}
        out.append(BinScores(label=label, count=len(hyps), scores=scores))
    return out


def min_words_filter(records, k: int = 3, field_name: str = "target") -> list:
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    kept = []
    for i, rec in enumerate(records):
        if field_name not in rec:
            raise ValueError(f"record {i} has no {field_name!r} field")
        if len(str(rec[field_name]).split()) >= k:
            kept.append(rec)
    return kept


_TASK_PROMPTS = {
    "summarization": ("summarize: ", ("document",), "summary"),
    "ntg": ("generate title: ", ("article",), "title"),
    "qg": ("generate question: ", ("passage", "answer"), "question"),
    "transliteration": ("transliterate: ", ("source",), "target"),
    "paraphrase": ("paraphrase: ", ("source",), "target"),
    "mt": (None, ("source",), "target"),
    "cst": (None, ("source",), "target"),
}


def format_task(task: str, fields: dict, language_pair: str = "ar-en") -> tuple:
    """Build the (prefixed input, bare target) pair for a training example."""
    task = canonical_task(task)
    if task not in _TASK_PROMPTS:
        raise ValueError(f"no prompt format for task {task!r}")
    prefix, input_keys, target_key = _TASK_PROMPTS[task]
    for key in (*input_keys, target_key):
        if key not in fields:
            raise ValueError(f"missing field {key!r} for task {task!r}")
    if prefix is None:
        prefix = f"translate {language_pair}: "
    if task == "qg":
        text = f"{prefix}{fields['passage']} answer: {fields['answer']}"
    else:
        text = prefix + str(fields[input_keys[0]])
    return text, str(fields[target_key])


def mix(streams: dict, proportions: dict, seed: int = 0, n: int = 1000) -> list:
    """Draw a multitask example stream: per draw, pick a task by proportion,
    then take that task's next example in order, wrapping around (sampling
    with replacement at the stream level)."""
    if set(streams) != set(proportions):
        raise ValueError("streams and proportions must cover the same tasks")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    names = list(proportions)
    probs = [float(proportions[t]) for t in names]
    if any(p < 0 for p in probs):
        raise ValueError(f"proportions must be non-negative, got {probs}")
    if abs(sum(probs) - 1.0) > 1e-9:
        raise ValueError(f"proportions must sum to 1, got {sum(probs)}")
    for t, p in zip(names, probs):
        if p > 0 and not streams[t]:
            raise ValueError(f"stream {t!r} has proportion {p} but no examples")

    rng = np.random.default_rng(seed)
    cum = np.cumsum(probs)
    picks = np.searchsorted(cum, rng.random(n), side="right")
    cursor = {t: 0 for t in names}
    out = []
    for p in picks:
        # Guard against a draw landing past the last edge via fp rounding.
        t = names[min(int(p), len(names) - 1)]
        stream = streams[t]
        out.append((t, stream[cursor[t] % len(stream)]))
        cursor[t] += 1
    return out


def render_report(runs, registry: dict) -> tuple:
    """Build Markdown and CSV score tables from recorded runs.

    Rows are (dataset, split, metric); columns are models; the best cell
    per row is bold in the Markdown view. Group averages (from each
    dataset's registry `group`) and an overall average are unweighted means
    of the member cells present for each model."""
    models = sorted({r.model_id for r in runs})
    cells: dict[tuple, dict] = {}
    for run in sorted(runs, key=lambda r: r.timestamp):
        for metric_name, value in run.scores.items():
            key = (run.dataset_id, run.split, metric_name)
            cells.setdefault(key, {})[run.model_id] = float(value)

    rows = sorted(cells)
    group_rows: list[tuple[str, dict]] = []
    groups = sorted(
        {
            registry[d].group
            for d, _, _ in rows
            if d in registry and registry[d].group
        }
    )
    for group in groups:
        member = [
            k for k in rows if k[0] in registry and registry[k[0]].group == group
        ]
        for metric_name in sorted({m for _, _, m in member}):
            picked = [k for k in member if k[2] == metric_name]
            avg = {
                m: _mean(cells[k][m] for k in picked if m in cells[k])
                for m in models
                if any(m in cells[k] for k in picked)
            }
            group_rows.append((f"Average {group} ({metric_name})", avg))
    for metric_name in sorted({m for _, _, m in rows}):
        picked = [k for k in rows if k[2] == metric_name]
        avg = {
            m: _mean(cells[k][m] for k in picked if m in cells[k])
            for m in models
            if any(m in cells[k] for k in picked)
        }
        group_rows.append((f"Average all ({metric_name})", avg))

    md_lines = ["| dataset | split | metric | " + " | ".join(models) + " |"]
    md_lines.append("|---" * (3 + len(models)) + "|")
    csv_lines = ["dataset,split,metric," + ",".join(models)]

    def fmt_md(row_cells: dict) -> list:
        present = [v for v in row_cells.values()]
        best = max(present) if present else None
        out = []
        for m in models:
            if m not in row_cells:
                out.append("")
            elif row_cells[m] == best:
                out.append(f"**{row_cells[m]:.2f}**")
            else:
                out.append(f"{row_cells[m]:.2f}")
        return out

    for key in rows:
        dataset_id, split, metric_name = key
        md_lines.append(
            f"| {dataset_id} | {split} | {metric_name} | "
            + " | ".join(fmt_md(cells[key]))
            + " |"
        )
        csv_lines.append(
            ",".join(
                [dataset_id, split, metric_name]
                + [repr(cells[key][m]) if m in cells[key] else "" for m in models]
            )
        )
    for label, avg in group_rows:
        md_lines.append(f"| {label} | | | " + " | ".join(fmt_md(avg)) + " |")
        csv_lines.append(
            ",".join(
                [label, "", ""] + [repr(avg[m]) if m in avg else "" for m in models]
            )
        )
    return "\n".join(md_lines) + "\n", "\n".join(csv_lines) + "\n"
