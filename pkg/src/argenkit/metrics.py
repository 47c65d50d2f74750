"""Evaluation metrics: BLEU, ROUGE-1/2/L, QA exact-match and token F1,
accuracy, macro F1, and the composite leaderboard score.

Everything here is a pure function over tokens or strings. Tokenization and
text cleaning policy belong to the caller; the only normalization done
internally is the QA answer normalization used by exact_match/qa_token_f1.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass

import regex

from .normalize import strip_diacritics

SMOOTHING_MODES = ("none", "add1")

_PUNCT_RE = regex.compile(r"\p{P}+")


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ClusterRow:
    cluster: str
    metric_a: float
    metric_b: float


@dataclass(frozen=True)
class ArlueResult:
    avg_a: float
    avg_b: float
    score: float


def _tokens(text) -> list:
    return text.split() if isinstance(text, str) else list(text)


def _ngrams(tokens, n: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
    )


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def bleu(hypotheses, references, smoothing: str = "none") -> BleuScore:
    """Corpus BLEU over pre-tokenized segments, n-grams up to 4.

    Unsmoothed by default: any zero clipped precision zeroes the score.
    smoothing="add1" applies add-one smoothing to the n>=2 precisions,
    which is the usual fix when scoring single sentences.
    """
    if smoothing not in SMOOTHING_MODES:
        raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}")
    hypotheses = [_tokens(h) for h in hypotheses]
    references = [_tokens(r) for r in references]
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise ValueError("need at least one hypothesis/reference pair")

    matches = [0] * 4
    totals = [0] * 4
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, 5):
            hyp_grams = _ngrams(hyp, n)
            if not hyp_grams:
                continue
            ref_grams = _ngrams(ref, n)
            matches[n - 1] += sum(
                min(c, ref_grams[g]) for g, c in hyp_grams.items()
            )
            totals[n - 1] += sum(hyp_grams.values())

    precisions = []
    for n in range(1, 5):
        m, t = matches[n - 1], totals[n - 1]
        if smoothing == "add1" and n >= 2:
            m, t = m + 1, t + 1
        precisions.append(m / t if t else 0.0)
    precisions = tuple(precisions)

    if hyp_len == 0:
        return BleuScore(0.0, precisions, 0.0, 0, ref_len)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - ref_len / hyp_len)
    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / 4) * 100
    return BleuScore(score, precisions, bp, hyp_len, ref_len)


def rouge_n(hypothesis, reference, n: int) -> RougeScore:
    """N-gram multiset overlap; precision against the hypothesis, recall
    against the reference. A side with no n-grams scores zero."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    hyp = _ngrams(_tokens(hypothesis), n)
    ref = _ngrams(_tokens(reference), n)
    overlap = sum((hyp & ref).values())
    hyp_total = sum(hyp.values())
    ref_total = sum(ref.values())
    p = overlap / hyp_total if hyp_total else 0.0
    r = overlap / ref_total if ref_total else 0.0
    return RougeScore(precision=p, recall=r, f1=_f1(p, r))


def _lcs_len(a, b) -> int:
    # Quadratic DP over one rolling row.
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(hypothesis, reference) -> RougeScore:
    hyp = _tokens(hypothesis)
    ref = _tokens(reference)
    lcs = _lcs_len(hyp, ref)
    p = lcs / len(hyp) if hyp else 0.0
    r = lcs / len(ref) if ref else 0.0
    return RougeScore(precision=p, recall=r, f1=_f1(p, r))


def qa_normalize(text: str) -> str:
    """Answer normalization: lowercase, drop Arabic diacritics and tatweel,
    delete punctuation, collapse whitespace."""
    text = strip_diacritics(text.lower())
    text = _PUNCT_RE.sub("", text)
    return " ".join(text.split())


def exact_match(prediction: str, gold: str) -> int:
    return int(qa_normalize(prediction) == qa_normalize(gold))


def qa_token_f1(prediction: str, gold: str) -> float:
    pred = qa_normalize(prediction).split()
    ref = qa_normalize(gold).split()
    if not pred or not ref:
        return float(pred == ref)
    common = sum((Counter(pred) & Counter(ref)).values())
    if common == 0:
        return 0.0
    return _f1(common / len(pred), common / len(ref))


def accuracy(pairs) -> float:
    pairs = list(pairs)
    if not pairs:
        raise ValueError("accuracy needs at least one (prediction, gold) pair")
    return sum(1 for p, g in pairs if p == g) / len(pairs)


def macro_f1(pairs, labels=None) -> float:
    """Unweighted mean of per-class F1. A label absent from both sides
    contributes 0, so passing an oversized label set lowers the mean."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("macro_f1 needs at least one (prediction, gold) pair")
    if labels is None:
        labels = sorted({p for p, _ in pairs} | {g for _, g in pairs})
    else:
        labels = list(labels)
        if not labels:
            raise ValueError("label set must be non-empty")
    scores = []
    for label in labels:
        tp = sum(1 for p, g in pairs if p == label and g == label)
        fp = sum(1 for p, g in pairs if p == label and g != label)
        fn = sum(1 for p, g in pairs if p != label and g == label)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        scores.append(_f1(prec, rec))
    return sum(scores) / len(scores)


def arlue_score(rows) -> ArlueResult:
    """Composite benchmark score: mean of the two per-cluster column means.

    The column means are kept at full precision before the final averaging;
    rounding them first shifts the composite by a visible 0.01 on real
    leaderboard tables.
    """
    rows = [
        r
        if isinstance(r, ClusterRow)
        else ClusterRow(**r)
        if isinstance(r, Mapping)
        else ClusterRow(*r)
        for r in rows
    ]
    if not rows:
        raise ValueError("empty cluster table")
    seen = set()
    for row in rows:
        if row.cluster in seen:
            raise ValueError(f"duplicate cluster: {row.cluster!r}")
        seen.add(row.cluster)
        for value in (row.metric_a, row.metric_b):
            if not 0.0 <= value <= 100.0:
                raise ValueError(
                    f"cluster {row.cluster!r}: score {value} outside [0, 100]"
                )
    avg_a = sum(r.metric_a for r in rows) / len(rows)
    avg_b = sum(r.metric_b for r in rows) / len(rows)
    return ArlueResult(avg_a=avg_a, avg_b=avg_b, score=(avg_a + avg_b) / 2)
