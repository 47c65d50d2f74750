"""HTTP service exposing the toolkit.

Every endpoint is a stateless wrapper over one core operation; the only
state on disk is the dataset registry and the run log under the data
directory the app was created with. Core ValueErrors surface as 400s,
unknown datasets as 404s, and repeated blind-test evaluations as 409s.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, codeswitch, denoise, harness, metrics, paraphrase
from .. import tokenizer as tok
from ..normalize import NormalizationConfig, normalize
from . import schemas as s


def create_app(data_dir=None) -> FastAPI:
    app = FastAPI(title="argenkit", version=__version__)
    root = harness.data_root(data_dir)

    @app.exception_handler(ValueError)
    def value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(codeswitch.TranslationError)
    def translation_error(request: Request, exc: codeswitch.TranslationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(harness.DuplicateTestRunError)
    def duplicate_run(request: Request, exc: harness.DuplicateTestRunError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=s.HealthResponse)
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "model_format_version": tok.MODEL_VERSION,
        }

    @app.post("/normalize", response_model=s.NormalizeResponse)
    def normalize_texts(req: s.NormalizeRequest):
        config = NormalizationConfig(repeat_threshold=req.repeat_threshold)
        if req.rules is not None:
            config = config.with_rules(set(req.rules))
        results = []
        for text in req.texts:
            clean = normalize(text, config)
            results.append(
                {"text": clean.text, "applied_rules": list(clean.applied_rules)}
            )
        return {"results": results}

    @app.post("/tokenizer/train", response_model=s.ModelDoc)
    def train_tokenizer(req: s.TrainTokenizerRequest):
        model = tok.train(req.corpus, req.vocab_size, req.specials)
        return tok.model_to_dict(model)

    @app.post("/tokenizer/encode", response_model=s.EncodeResponse)
    def encode(req: s.EncodeRequest):
        model = tok.model_from_dict(req.model.model_dump())
        results = []
        for text in req.texts:
            seq = tok.encode(model, text)
            results.append({"ids": list(seq.ids), "offsets": list(seq.offsets)})
        return {"results": results}

    @app.post("/tokenizer/decode", response_model=s.DecodeResponse)
    def decode(req: s.DecodeRequest):
        model = tok.model_from_dict(req.model.model_dump())
        return {"texts": [tok.decode(model, ids) for ids in req.sequences]}

    @app.post("/corrupt", response_model=s.CorruptResponse)
    def corrupt(req: s.CorruptRequest):
        config = denoise.CorruptionConfig(
            drop_rate=req.drop_rate,
            seed=req.seed,
            max_sentinels=req.max_sentinels,
        )
        results = []
        for i, tokens in enumerate(req.sequences):
            ex = denoise.corrupt(tokens, config, req.start_index + i)
            results.append(
                {
                    "input_tokens": list(ex.input_tokens),
                    "target_tokens": list(ex.target_tokens),
                    "dropped_mask": list(ex.dropped_mask),
                }
            )
        return {"results": results}

    @app.post("/codeswitch/synthesize", response_model=s.CodeSwitchResponse)
    def codeswitch_synthesize(req: s.CodeSwitchRequest):
        config = codeswitch.CSConfig(
            coverage=req.coverage,
            ngram_min=req.ngram_min,
            ngram_max=req.ngram_max,
            target_lang=req.target_lang,
            seed=req.seed,
        )
        translator = codeswitch.DictTranslator(req.dictionary)
        results = []
        for i, tokens in enumerate(req.sequences):
            ex = codeswitch.synthesize(tokens, translator, config, req.start_index + i)
            results.append(
                {
                    "mixed_tokens": list(ex.mixed_tokens),
                    "replaced_spans": list(ex.replaced_spans),
                    "under_coverage": ex.under_coverage,
                }
            )
        return {"results": results}

    @app.post("/paraphrase/overlap", response_model=s.OverlapResponse)
    def overlap(req: s.OverlapRequest):
        return {"overlap": paraphrase.unigram_overlap(req.a, req.b)}

    @app.post("/paraphrase/mine", response_model=s.MineResponse)
    def mine(req: s.MineRequest):
        config = paraphrase.MiningConfig(
            sim_min=req.sim_min,
            sim_max=req.sim_max,
            ov_min=req.ov_min,
            ov_max=req.ov_max,
        )
        out = paraphrase.mine(
            req.pairs,
            codeswitch.DictTranslator(req.dictionary),
            paraphrase.TokenCosineScorer(),
            config,
            target_lang=req.target_lang,
        )
        return {"results": [vars(p) for p in out]}

    @app.post("/split", response_model=s.SplitResponse)
    def split(req: s.SplitRequest):
        train, dev, test = paraphrase.split_dataset(req.records, req.ratios, req.seed)
        return {"train": train, "dev": dev, "test": test}

    @app.post("/evaluate", response_model=s.EvaluateResponse)
    def evaluate(req: s.EvaluateRequest):
        return {"scores": harness.score_pairs(req.task, req.hypotheses, req.references)}

    @app.post("/arlue", response_model=s.ArlueResponse)
    def arlue(req: s.ArlueRequest):
        rows = [(r.cluster, r.metric_a, r.metric_b) for r in req.rows]
        result = metrics.arlue_score(rows)
        return {"avg_a": result.avg_a, "avg_b": result.avg_b, "score": result.score}

    @app.post("/length-bins", response_model=s.LengthBinsResponse)
    def length_bins(req: s.LengthBinsRequest):
        bins = harness.LengthBins(tuple(req.boundaries))
        rows = harness.length_binned(req.triples, bins, req.task)
        return {
            "bins": [
                {"label": r.label, "count": r.count, "scores": r.scores} for r in rows
            ]
        }

    @app.post("/stats/cs-rate", response_model=s.CsRateResponse)
    def cs_rate(req: s.CsRateRequest):
        total = foreign = 0
        for text in req.texts:
            for token in text.split():
                total += 1
                foreign += 0 if codeswitch.has_arabic(token) else 1
        return {
            "rate": foreign / total if total else 0.0,
            "tokens": total,
            "non_arabic": foreign,
        }

    @app.post("/stats/min-words", response_model=s.MinWordsResponse)
    def min_words(req: s.MinWordsRequest):
        return {
            "kept": [codeswitch.has_min_arabic_words(t, req.k) for t in req.texts]
        }

    @app.post("/stats/length-bins", response_model=s.BinCountsResponse)
    def bin_counts(req: s.BinCountsRequest):
        bins = harness.LengthBins(tuple(req.boundaries))
        counts = [0] * len(bins.labels)
        for text in req.texts:
            counts[bins.index(len(text.split()))] += 1
        return {
            "bins": [
                {"label": label, "count": c} for label, c in zip(bins.labels, counts)
            ]
        }

    @app.get("/datasets", response_model=s.DatasetListResponse)
    def datasets():
        registry = harness.load_registry(root)
        return {
            "datasets": [harness.spec_to_dict(spec) for spec in registry.values()]
        }

    @app.get("/datasets/{dataset_id}", response_model=s.DatasetDetailResponse)
    def dataset_detail(dataset_id: str):
        registry = harness.load_registry(root)
        if dataset_id not in registry:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown dataset: {dataset_id}"}
            )
        spec = registry[dataset_id]
        splits = harness.load_dataset(spec, root)
        return {
            "dataset": harness.spec_to_dict(spec),
            "counts": {name: len(records) for name, records in splits.items()},
        }

    @app.post("/runs", response_model=s.RunResponse)
    def create_run(req: s.RunRequest):
        registry = harness.load_registry(root)
        if req.dataset_id not in registry:
            return JSONResponse(
                status_code=404,
                content={"detail": f"unknown dataset: {req.dataset_id}"},
            )
        spec = registry[req.dataset_id]
        records = harness.load_dataset(spec, root)
        if req.split not in records:
            return JSONResponse(
                status_code=404,
                content={
                    "detail": f"dataset {req.dataset_id} has no split {req.split!r}"
                },
            )
        if (req.hypotheses is None) == (req.hyp_path is None):
            raise ValueError("provide exactly one of hypotheses or hyp_path")
        run = harness.EvalRun(
            model_id=req.model_id,
            dataset_id=req.dataset_id,
            split=req.split,
            hypotheses=req.hyp_path or "",
        )
        harness.evaluate_run(
            run, spec, records[req.split], hyp_lines=req.hypotheses, data_dir=root
        )
        harness.record_run(run, root, force=req.force)
        return {"run": run.to_dict()}

    @app.get("/runs", response_model=s.RunListResponse)
    def list_runs():
        return {"runs": [r.to_dict() for r in harness.load_runs(root)]}

    @app.post("/report", response_model=s.ReportResponse)
    def report():
        registry = harness.load_registry(root)
        markdown, csv_text = harness.render_report(harness.load_runs(root), registry)
        return {"markdown": markdown, "csv": csv_text}

    return app


def main() -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="Run the argenkit service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--data-dir", default=None)
    args = parser.parse_args()
    uvicorn.run(create_app(args.data_dir), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
