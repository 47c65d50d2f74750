"""Request/response models for the HTTP service.

Shapes only; value constraints (rates in range, ascending boundaries, gate
ordering) live in the core modules, whose ValueErrors the app maps to 400.
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel


class HealthResponse(BaseModel):
    status: str
    version: str
    model_format_version: int


class NormalizeRequest(BaseModel):
    texts: list[str]
    rules: Optional[list[str]] = None
    repeat_threshold: int = 3


class NormalizedItem(BaseModel):
    text: str
    applied_rules: list[str]


class NormalizeResponse(BaseModel):
    results: list[NormalizedItem]


class ModelDoc(BaseModel):
    pieces: list[str]
    merges: list[tuple[str, str]]
    specials: list[str]
    version: int


class TrainTokenizerRequest(BaseModel):
    corpus: list[str]
    vocab_size: int
    specials: Optional[list[str]] = None


class EncodeRequest(BaseModel):
    model: ModelDoc
    texts: list[str]


class EncodedItem(BaseModel):
    ids: list[int]
    offsets: list[tuple[int, int]]


class EncodeResponse(BaseModel):
    results: list[EncodedItem]


class DecodeRequest(BaseModel):
    model: ModelDoc
    sequences: list[list[int]]


class DecodeResponse(BaseModel):
    texts: list[str]


class CorruptRequest(BaseModel):
    sequences: list[list[str]]
    drop_rate: float = 0.15
    seed: int = 0
    max_sentinels: int = 100
    start_index: int = 0


class CorruptedItem(BaseModel):
    input_tokens: list[str]
    target_tokens: list[str]
    dropped_mask: list[bool]


class CorruptResponse(BaseModel):
    results: list[CorruptedItem]


class CodeSwitchRequest(BaseModel):
    sequences: list[list[str]]
    dictionary: dict[str, str]
    coverage: float = 0.30
    ngram_min: int = 1
    ngram_max: int = 3
    target_lang: str = "en"
    seed: int = 0
    start_index: int = 0


class CodeSwitchItem(BaseModel):
    mixed_tokens: list[str]
    replaced_spans: list[tuple[int, int, str]]
    under_coverage: bool


class CodeSwitchResponse(BaseModel):
    results: list[CodeSwitchItem]


class OverlapRequest(BaseModel):
    a: str
    b: str


class OverlapResponse(BaseModel):
    overlap: float


class MineRequest(BaseModel):
    pairs: list[tuple[str, str]]
    dictionary: dict[str, str]
    sim_min: float = 0.70
    sim_max: float = 0.99
    ov_min: float = 0.35
    ov_max: float = 0.70
    target_lang: str = "ar"


class MinedPair(BaseModel):
    side_a: str
    side_b: str
    similarity: Optional[float]
    overlap: Optional[float]
    verdict: str
    detail: Optional[str] = None


class MineResponse(BaseModel):
    results: list[MinedPair]


class SplitRequest(BaseModel):
    records: list[Any]
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0


class SplitResponse(BaseModel):
    train: list[Any]
    dev: list[Any]
    test: list[Any]


class EvaluateRequest(BaseModel):
    task: str
    hypotheses: list[str]
    references: list[str]


class EvaluateResponse(BaseModel):
    scores: dict[str, float]


class ArlueRow(BaseModel):
    cluster: str
    metric_a: float
    metric_b: float


class ArlueRequest(BaseModel):
    rows: list[ArlueRow]


class ArlueResponse(BaseModel):
    avg_a: float
    avg_b: float
    score: float


class LengthBinsRequest(BaseModel):
    triples: list[tuple[str, str, str]]
    boundaries: list[int] = [10, 20]
    task: str = "mt"


class BinItem(BaseModel):
    label: str
    count: int
    scores: dict[str, float]


class LengthBinsResponse(BaseModel):
    bins: list[BinItem]


class CsRateRequest(BaseModel):
    texts: list[str]


class CsRateResponse(BaseModel):
    rate: float
    tokens: int
    non_arabic: int


class MinWordsRequest(BaseModel):
    texts: list[str]
    k: int = 3


class MinWordsResponse(BaseModel):
    kept: list[bool]


class BinCountsRequest(BaseModel):
    texts: list[str]
    boundaries: list[int] = [10, 20]


class BinCount(BaseModel):
    label: str
    count: int


class BinCountsResponse(BaseModel):
    bins: list[BinCount]


class DatasetInfo(BaseModel):
    id: str
    task: str
    format: str
    splits: dict[str, str]
    language_pair: Optional[str] = None
    group: Optional[str] = None


class DatasetListResponse(BaseModel):
    datasets: list[DatasetInfo]


class DatasetDetailResponse(BaseModel):
    dataset: DatasetInfo
    counts: dict[str, int]


class RunRequest(BaseModel):
    model_id: str
    dataset_id: str
    split: str
    hypotheses: Optional[list[str]] = None
    hyp_path: Optional[str] = None
    force: bool = False


class RunRecord(BaseModel):
    model_id: str
    dataset_id: str
    split: str
    hypotheses: str = ""
    scores: dict[str, float]
    timestamp: str


class RunResponse(BaseModel):
    run: RunRecord


class RunListResponse(BaseModel):
    runs: list[RunRecord]


class ReportResponse(BaseModel):
    markdown: str
    csv: str
