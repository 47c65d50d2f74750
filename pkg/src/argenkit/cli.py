"""Command-line entry point.

Every subcommand is a thin client of the HTTP service: by default requests
go to an in-process app instance (no socket), and --server redirects the
same calls to a running instance. Data goes to stdout, diagnostics to
stderr; exit codes are 0 (success), 1 (usage), 2 (bad data or service
error).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .config import load_config, rules_from_csv
from .denoise import DEFAULT_DROP_RATE
from .tokenizer import MODEL_VERSION

DEFAULT_BATCH = 256


class ServiceError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(f"service error {status}: {detail}")
        self.status = status
        self.detail = detail


class Client:
    """Minimal JSON-over-HTTP client; in-process unless a server is given."""

    def __init__(self, server=None, data_dir=None):
        self._transport_errors: tuple = ()
        if server:
            import httpx

            self._http = httpx.Client(base_url=server, timeout=120.0)
            self._transport_errors = (httpx.HTTPError,)
        else:
            import warnings

            with warnings.catch_warnings():
                # the bundled fastapi warns about its own testclient import
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import create_app

            self._http = TestClient(create_app(data_dir))

    def post(self, path: str, payload: dict) -> dict:
        try:
            response = self._http.post(path, json=payload)
        except self._transport_errors as exc:
            raise ServiceError(0, f"cannot reach server: {exc}") from exc
        return self._done(response)

    def get(self, path: str) -> dict:
        try:
            response = self._http.get(path)
        except self._transport_errors as exc:
            raise ServiceError(0, f"cannot reach server: {exc}") from exc
        return self._done(response)

    @staticmethod
    def _done(response) -> dict:
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except Exception:
                detail = response.text
            raise ServiceError(response.status_code, str(detail))
        return response.json()


class Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; this tool reserves 2 for data
    # errors, so usage problems exit 1 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_lines(path) -> list:
    if path in (None, "-"):
        return sys.stdin.read().splitlines()
    with open(path, encoding="utf-8-sig") as fh:
        return fh.read().splitlines()


def _emit(lines) -> None:
    out = sys.stdout
    for line in lines:
        out.write(line)
        out.write("\n")


def _jsonl_records(lines, required_key: str) -> list:
    records = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(rec, dict) or required_key not in rec:
            raise ValueError(f"line {lineno}: expected an object with {required_key!r}")
        records.append(rec)
    return records


def _batches(items, size: int):
    for i in range(0, len(items), size):
        yield i, items[i : i + size]


def _map_batches(client, jobs, requests):
    """POST prepared (path, payload) batches, preserving input order."""
    requests = list(requests)
    if jobs <= 1 or len(requests) <= 1:
        return [client.post(path, payload) for path, payload in requests]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(client.post, path, payload) for path, payload in requests]
        return [f.result() for f in futures]


def _pick(flag_value, config_value):
    return config_value if flag_value is None else flag_value


def _parse_pair(raw: str, flag: str) -> tuple:
    parts = raw.split(":")
    if len(parts) != 2:
        raise ValueError(f"{flag} expects LO:HI, got {raw!r}")
    return float(parts[0]), float(parts[1])


def _load_tsv_pairs(lines) -> list:
    pairs = []
    for lineno, line in enumerate(lines, 1):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ValueError(
                f"line {lineno}: expected 2 tab-separated columns, got {len(cols)}"
            )
        pairs.append((cols[0], cols[1]))
    return pairs


def build_parser() -> Parser:
    parser = Parser(prog="argenkit", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=f"argenkit {__version__} (model format {MODEL_VERSION})",
    )
    parser.add_argument("--server", help="base URL of a running service")
    parser.add_argument("--config", help="INI configuration file")
    parser.add_argument("--data-dir", help="root for registry, runs, reports")
    parser.add_argument("--jobs", type=int, default=1, help="parallel batch requests")
    parser.add_argument(
        "--batch-size", type=int, default=DEFAULT_BATCH, help=argparse.SUPPRESS
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("normalize", help="clean text lines")
    p.add_argument("--input", help="input file (default stdin)")
    p.add_argument("--rules", help="comma list of rules to enable")
    p.add_argument("--repeat-threshold", type=int, dest="repeat_threshold")

    p = sub.add_parser("train-tokenizer", help="learn a subword model")
    p.add_argument("--input", required=True, help="training corpus, one line each")
    p.add_argument("--vocab-size", type=int, dest="vocab_size")
    p.add_argument("--output", required=True, help="where to write the model JSON")

    p = sub.add_parser("encode", help='JSONL {"text"} -> {"ids"}')
    p.add_argument("--model", required=True)
    p.add_argument("--input")

    p = sub.add_parser("decode", help='JSONL {"ids"} -> {"text"}')
    p.add_argument("--model", required=True)
    p.add_argument("--input")

    p = sub.add_parser("corrupt", help='JSONL {"tokens"} -> span-corrupted pairs')
    p.add_argument("--rate", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-sentinels", type=int, dest="max_sentinels")
    p.add_argument("--start-index", type=int, default=0, dest="start_index")
    p.add_argument("--input")

    p = sub.add_parser("codeswitch", help='JSONL {"tokens"} -> code-switched text')
    p.add_argument("--dict", required=True, dest="dict_path", help="two-column TSV")
    p.add_argument("--coverage", type=float)
    p.add_argument("--ngram", help="MIN:MAX span length range")
    p.add_argument("--lang")
    p.add_argument("--seed", type=int)
    p.add_argument("--start-index", type=int, default=0, dest="start_index")
    p.add_argument("--input")

    p = sub.add_parser("mine-paraphrases", help="translate, gate, emit verdicts")
    p.add_argument("--dict", required=True, dest="dict_path", help="two-column TSV")
    p.add_argument("--sim", help="LO:HI similarity gate")
    p.add_argument("--overlap", help="LO:HI overlap gate")
    p.add_argument("--lang", default="ar")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--input")

    p = sub.add_parser("split", help="deterministic train/dev/test partition")
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int)
    p.add_argument("--input")
    p.add_argument("--output-prefix", required=True, dest="output_prefix")

    p = sub.add_parser("evaluate", help="score hypotheses against references")
    p.add_argument("--task")
    p.add_argument("--hyp", help="hypotheses file, one line per example")
    p.add_argument("--ref", help="references file, one line per example")
    p.add_argument("--dataset", help="registered dataset id")
    p.add_argument("--split")
    p.add_argument("--model", help="model id for the run log")
    p.add_argument("--force", action="store_true", help="repeat a blind test")

    p = sub.add_parser("arlue", help="composite score from a cluster CSV")
    p.add_argument("--table", required=True, help="CSV: cluster,metric_a,metric_b")

    p = sub.add_parser("report", help="render score tables from recorded runs")
    p.add_argument("--output-dir", dest="output_dir")

    p = sub.add_parser("stats", help="corpus statistics")
    stat = p.add_subparsers(dest="stat", metavar="STAT")
    q = stat.add_parser("cs-rate", help="aggregate non-Arabic token fraction")
    q.add_argument("--input")
    q = stat.add_parser("min-words", help="keep lines with >= k Arabic words")
    q.add_argument("--k", type=int, default=3)
    q.add_argument("--input")
    q = stat.add_parser("length-bins", help="line counts per source-length bin")
    q.add_argument("--bins", help="comma list of boundaries")
    q.add_argument("--input")

    return parser


def cmd_normalize(args, cfg, client) -> int:
    lines = _read_lines(args.input)
    rules = None
    if args.rules is not None:
        rules = sorted(rules_from_csv(args.rules))
    threshold = _pick(args.repeat_threshold, cfg.normalize.repeat_threshold)
    requests = [
        ("/normalize", {"texts": batch, "rules": rules, "repeat_threshold": threshold})
        for _, batch in _batches(lines, args.batch_size)
    ]
    for reply in _map_batches(client, args.jobs, requests):
        _emit(item["text"] for item in reply["results"])
    return 0


def cmd_train_tokenizer(args, cfg, client) -> int:
    corpus = _read_lines(args.input)
    vocab = _pick(args.vocab_size, cfg.vocab_size)
    doc = client.post("/tokenizer/train", {"corpus": corpus, "vocab_size": vocab})
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=True)
        fh.write("\n")
    print(f"wrote {args.output} ({len(doc['pieces'])} pieces)", file=sys.stderr)
    return 0


def _load_model_doc(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_encode(args, cfg, client) -> int:
    doc = _load_model_doc(args.model)
    records = _jsonl_records(_read_lines(args.input), "text")
    requests = [
        ("/tokenizer/encode", {"model": doc, "texts": [r["text"] for r in batch]})
        for _, batch in _batches(records, args.batch_size)
    ]
    for reply in _map_batches(client, args.jobs, requests):
        _emit(json.dumps({"ids": item["ids"]}) for item in reply["results"])
    return 0


def cmd_decode(args, cfg, client) -> int:
    doc = _load_model_doc(args.model)
    records = _jsonl_records(_read_lines(args.input), "ids")
    requests = [
        ("/tokenizer/decode", {"model": doc, "sequences": [r["ids"] for r in batch]})
        for _, batch in _batches(records, args.batch_size)
    ]
    for reply in _map_batches(client, args.jobs, requests):
        _emit(json.dumps({"text": t}, ensure_ascii=False) for t in reply["texts"])
    return 0


def cmd_corrupt(args, cfg, client) -> int:
    records = _jsonl_records(_read_lines(args.input), "tokens")
    payload_base = {
        "drop_rate": _pick(args.rate, cfg.denoise.drop_rate),
        "seed": _pick(args.seed, cfg.denoise.seed),
        "max_sentinels": _pick(args.max_sentinels, cfg.denoise.max_sentinels),
    }
    requests = []
    for offset, batch in _batches(records, args.batch_size):
        payload = dict(payload_base)
        payload["sequences"] = [r["tokens"] for r in batch]
        payload["start_index"] = args.start_index + offset
        requests.append(("/corrupt", payload))
    for reply in _map_batches(client, args.jobs, requests):
        _emit(
            json.dumps(
                {"input": item["input_tokens"], "target": item["target_tokens"]},
                ensure_ascii=False,
            )
            for item in reply["results"]
        )
    return 0


def cmd_codeswitch(args, cfg, client) -> int:
    from .codeswitch import load_dictionary

    records = _jsonl_records(_read_lines(args.input), "tokens")
    ngram_min, ngram_max = cfg.codeswitch.ngram_min, cfg.codeswitch.ngram_max
    if args.ngram is not None:
        lo, hi = _parse_pair(args.ngram, "--ngram")
        ngram_min, ngram_max = int(lo), int(hi)
    payload_base = {
        "dictionary": load_dictionary(args.dict_path),
        "coverage": _pick(args.coverage, cfg.codeswitch.coverage),
        "ngram_min": ngram_min,
        "ngram_max": ngram_max,
        "target_lang": _pick(args.lang, cfg.codeswitch.target_lang),
        "seed": _pick(args.seed, cfg.codeswitch.seed),
    }
    requests = []
    for offset, batch in _batches(records, args.batch_size):
        payload = dict(payload_base)
        payload["sequences"] = [r["tokens"] for r in batch]
        payload["start_index"] = args.start_index + offset
        requests.append(("/codeswitch/synthesize", payload))
    for reply in _map_batches(client, args.jobs, requests):
        _emit(
            json.dumps(
                {
                    "tokens": item["mixed_tokens"],
                    "spans": item["replaced_spans"],
                    "under_coverage": item["under_coverage"],
                },
                ensure_ascii=False,
            )
            for item in reply["results"]
        )
    return 0


def cmd_mine(args, cfg, client) -> int:
    from .codeswitch import load_dictionary

    lines = _read_lines(args.input)
    if args.format == "tsv":
        pairs = _load_tsv_pairs(lines)
    else:
        records = _jsonl_records(lines, "foreign")
        for i, rec in enumerate(records, 1):
            if "reference" not in rec:
                raise ValueError(f"record {i}: expected 'reference' next to 'foreign'")
        pairs = [(r["foreign"], r["reference"]) for r in records]
    sim = (cfg.paraphrase.sim_min, cfg.paraphrase.sim_max)
    if args.sim is not None:
        sim = _parse_pair(args.sim, "--sim")
    ov = (cfg.paraphrase.ov_min, cfg.paraphrase.ov_max)
    if args.overlap is not None:
        ov = _parse_pair(args.overlap, "--overlap")
    dictionary = load_dictionary(args.dict_path)
    requests = []
    for _, batch in _batches(pairs, args.batch_size):
        requests.append(
            (
                "/paraphrase/mine",
                {
                    "pairs": batch,
                    "dictionary": dictionary,
                    "sim_min": sim[0],
                    "sim_max": sim[1],
                    "ov_min": ov[0],
                    "ov_max": ov[1],
                    "target_lang": args.lang,
                },
            )
        )
    for reply in _map_batches(client, args.jobs, requests):
        for item in reply["results"]:
            row = {
                "a": item["side_a"],
                "b": item["side_b"],
                "similarity": item["similarity"],
                "overlap": item["overlap"],
                "verdict": item["verdict"],
            }
            if item.get("detail"):
                row["detail"] = item["detail"]
            print(json.dumps(row, ensure_ascii=False))
    return 0


def cmd_split(args, cfg, client) -> int:
    lines = _read_lines(args.input)
    try:
        ratios = tuple(float(r) for r in args.ratios.split(","))
    except ValueError as exc:
        raise ValueError(f"bad --ratios value: {args.ratios!r}") from exc
    reply = client.post(
        "/split",
        {"records": lines, "ratios": ratios, "seed": _pick(args.seed, cfg.seed)},
    )
    counts = {}
    for name in ("train", "dev", "test"):
        path = f"{args.output_prefix}.{name}"
        with open(path, "w", encoding="utf-8") as fh:
            for line in reply[name]:
                fh.write(line + "\n")
        counts[name] = len(reply[name])
    print(json.dumps(counts))
    return 0


def cmd_evaluate(args, cfg, client) -> int:
    if args.dataset is None:
        if not (args.task and args.hyp and args.ref):
            raise UsageError("file mode needs --task, --hyp, and --ref")
        scores = client.post(
            "/evaluate",
            {
                "task": args.task,
                "hypotheses": _read_lines(args.hyp),
                "references": _read_lines(args.ref),
            },
        )["scores"]
        print(json.dumps(scores))
        return 0
    if args.ref or args.task:
        raise UsageError("dataset mode reads task and references from the registry")
    if not (args.split and args.model and args.hyp):
        raise UsageError("dataset mode needs --dataset, --split, --model, and --hyp")
    reply = client.post(
        "/runs",
        {
            "model_id": args.model,
            "dataset_id": args.dataset,
            "split": args.split,
            "hypotheses": _read_lines(args.hyp),
            "force": args.force,
        },
    )
    print(json.dumps(reply["run"]["scores"]))
    return 0


def cmd_arlue(args, cfg, client) -> int:
    rows = []
    with open(args.table, encoding="utf-8-sig", newline="") as fh:
        for lineno, cols in enumerate(csv.reader(fh), 1):
            if not cols or not any(c.strip() for c in cols):
                continue
            if len(cols) != 3:
                raise ValueError(
                    f"{args.table}:{lineno}: expected cluster,metric_a,metric_b"
                )
            try:
                rows.append(
                    {
                        "cluster": cols[0].strip(),
                        "metric_a": float(cols[1]),
                        "metric_b": float(cols[2]),
                    }
                )
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ValueError(
                    f"{args.table}:{lineno}: non-numeric score in {cols!r}"
                ) from None
    reply = client.post("/arlue", {"rows": rows})
    print(
        json.dumps(
            {
                "avg_a": round(reply["avg_a"], 2),
                "avg_b": round(reply["avg_b"], 2),
                "score": round(reply["score"], 2),
            }
        )
    )
    return 0


def cmd_report(args, cfg, client) -> int:
    reply = client.post("/report", {})
    out_dir = Path(args.output_dir or cfg.data_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.md").write_text(reply["markdown"], encoding="utf-8")
    (out_dir / "report.csv").write_text(reply["csv"], encoding="utf-8")
    print(f"wrote {out_dir / 'report.md'} and {out_dir / 'report.csv'}", file=sys.stderr)
    sys.stdout.write(reply["markdown"])
    return 0


def cmd_stats(args, cfg, client) -> int:
    if args.stat == "cs-rate":
        reply = client.post("/stats/cs-rate", {"texts": _read_lines(args.input)})
        print(f"{reply['rate']:.4f}")
        print(
            f"{reply['non_arabic']} non-Arabic of {reply['tokens']} tokens",
            file=sys.stderr,
        )
        return 0
    if args.stat == "min-words":
        lines = _read_lines(args.input)
        reply = client.post("/stats/min-words", {"texts": lines, "k": args.k})
        _emit(line for line, keep in zip(lines, reply["kept"]) if keep)
        return 0
    if args.stat == "length-bins":
        boundaries = list(cfg.bins.boundaries)
        if args.bins is not None:
            boundaries = [int(b) for b in args.bins.split(",") if b.strip()]
        reply = client.post(
            "/stats/length-bins",
            {"texts": _read_lines(args.input), "boundaries": boundaries},
        )
        print(json.dumps(reply["bins"]))
        return 0
    raise UsageError("choose a stat: cs-rate, min-words, length-bins")


class UsageError(Exception):
    pass


_HANDLERS = {
    "normalize": cmd_normalize,
    "train-tokenizer": cmd_train_tokenizer,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "corrupt": cmd_corrupt,
    "codeswitch": cmd_codeswitch,
    "mine-paraphrases": cmd_mine,
    "split": cmd_split,
    "evaluate": cmd_evaluate,
    "arlue": cmd_arlue,
    "report": cmd_report,
    "stats": cmd_stats,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = load_config(args.config)
        if args.data_dir:
            from dataclasses import replace

            cfg = replace(cfg, data_dir=args.data_dir)
        client = Client(server=args.server, data_dir=cfg.data_dir)
        return _HANDLERS[args.command](args, cfg, client)
    except UsageError as exc:
        print(f"argenkit {args.command}: {exc}", file=sys.stderr)
        return 1
    except ServiceError as exc:
        print(f"argenkit {args.command}: {exc.detail}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"argenkit {args.command}: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(run())
