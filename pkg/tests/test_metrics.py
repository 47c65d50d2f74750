import math
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argenkit.metrics import (
    ArlueResult,
    ClusterRow,
    accuracy,
    arlue_score,
    bleu,
    exact_match,
    macro_f1,
    qa_normalize,
    qa_token_f1,
    rouge_l,
    rouge_n,
)

from oracles import bleu_oracle, lcs_exhaustive, rouge_n_oracle

FIXTURES = Path(__file__).parent / "fixtures"

# --- BLEU hand fixtures -----------------------------------------------------
# precisions worked out by hand; tolerance 1e-9

BLEU_CASES = [
    # (hypotheses, references, precisions, brevity_penalty)
    (
        ["the cat sat on the mat"],
        ["the cat sat on the mat"],
        (1.0, 1.0, 1.0, 1.0),
        1.0,
    ),
    (
        ["the the the the"],
        ["the cat"],
        (1 / 4, 0.0, 0.0, 0.0),
        1.0,  # hypothesis longer than reference
    ),
    (
        ["a b c d"],
        ["a b c d e"],
        (1.0, 1.0, 1.0, 1.0),
        math.exp(1 - 5 / 4),
    ),
    (
        ["a b", "c d e f"],
        ["a b", "c d x f"],
        (5 / 6, 2 / 4, 0.0, 0.0),
        1.0,  # equal corpus lengths
    ),
    (
        ["the quick brown fox jumps over the lazy dog"],
        ["the quick brown fox jumped over the lazy dog"],
        (8 / 9, 6 / 8, 4 / 7, 2 / 6),
        1.0,
    ),
]


def test_bleu_hand_fixtures():
    for hyps, refs, precisions, bp in BLEU_CASES:
        got = bleu(hyps, refs)
        for want, have in zip(precisions, got.precisions):
            assert have == pytest.approx(want, abs=1e-9)
        assert got.brevity_penalty == pytest.approx(bp, abs=1e-9)
        if any(p == 0.0 for p in precisions):
            assert got.score == 0.0
        else:
            want_score = 100.0 * bp * math.prod(precisions) ** 0.25
            assert got.score == pytest.approx(want_score, abs=1e-9)


def test_bleu_score_fields():
    got = bleu(["a b c d"], ["a b c d e"])
    assert got.hyp_len == 4
    assert got.ref_len == 5


def test_bleu_empty_hypothesis_scores_zero():
    got = bleu([""], ["a b"])
    assert got.score == 0.0
    assert got.brevity_penalty == 0.0


def test_bleu_validation():
    with pytest.raises(ValueError):
        bleu(["a"], ["a", "b"])
    with pytest.raises(ValueError):
        bleu([], [])
    with pytest.raises(ValueError):
        bleu(["a"], ["a"], smoothing="laplace")


def test_bleu_add1_smoothing_on_higher_orders_only():
    got = bleu(["a b c"], ["a b c"], smoothing="add1")
    # n=1 unsmoothed: 3/3; n=2: (2+1)/(2+1); n=3: (1+1)/(1+1); n=4: (0+1)/(0+1)
    assert got.precisions == (1.0, 1.0, 1.0, 1.0)
    assert got.score == pytest.approx(100.0)
    unsmoothed = bleu(["a b c"], ["a b c"])
    assert unsmoothed.score == 0.0  # no 4-grams, p4 = 0


def _random_corpus(rng, max_sentences=10, vocab="abcdef"):
    n = rng.randint(1, max_sentences)
    hyps, refs = [], []
    for _ in range(n):
        hyps.append(" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 10))))
        refs.append(" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 10))))
    return hyps, refs


def test_bleu_brute_force_battery():
    rng = random.Random(20260814)
    for _ in range(300):
        hyps, refs = _random_corpus(rng)
        got = bleu(hyps, refs)
        score, precisions, bp = bleu_oracle(hyps, refs)
        assert got.score == pytest.approx(score, abs=1e-9)
        assert got.brevity_penalty == pytest.approx(bp, abs=1e-9)
        for want, have in zip(precisions, got.precisions):
            assert have == pytest.approx(want, abs=1e-9)


def test_bleu_monotone_under_reference_substitution():
    # Replacing one hypothesis with its reference cannot lower corpus BLEU
    # as long as every *other* hypothesis is at least as long as its
    # reference (the brevity penalty can only move toward 1 then).
    rng = random.Random(99)
    for _ in range(200):
        n = rng.randint(2, 5)
        refs = [
            " ".join(rng.choice("abcd") for _ in range(rng.randint(1, 6)))
            for _ in range(n)
        ]
        target = rng.randrange(n)
        hyps = []
        for i, ref in enumerate(refs):
            lo = rng.randint(1, 6) if i == target else len(ref.split())
            hyps.append(" ".join(rng.choice("abcd") for _ in range(max(lo, 1))))
        before = bleu(hyps, refs).score
        hyps[target] = refs[target]
        after = bleu(hyps, refs).score
        assert after >= before - 1e-9


@given(
    st.lists(
        st.lists(st.sampled_from("abc"), min_size=4, max_size=9).map(" ".join),
        min_size=1,
        max_size=5,
    )
)
@settings(max_examples=150, deadline=None)
def test_bleu_perfect_match_is_100(sentences):
    got = bleu(sentences, list(sentences))
    assert got.score == pytest.approx(100.0)


# --- ROUGE ------------------------------------------------------------------


def test_rouge_fixtures():
    r1 = rouge_n("the cat sat", "the cat slept", 1)
    assert r1.precision == pytest.approx(2 / 3)
    assert r1.recall == pytest.approx(2 / 3)
    assert r1.f1 == pytest.approx(2 / 3)
    r2 = rouge_n("a b c", "a b d", 2)
    assert r2.precision == pytest.approx(1 / 2)
    rl = rouge_l("a c e", "a b c d e")
    assert rl.recall == pytest.approx(3 / 5)
    assert rl.precision == pytest.approx(1.0)


def test_rouge_multiset_clipping():
    # repeated hypothesis tokens must not overcount
    got = rouge_n("a a a", "a b", 1)
    assert got.precision == pytest.approx(1 / 3)
    assert got.recall == pytest.approx(1 / 2)


def test_rouge_against_oracle_battery():
    rng = random.Random(7)
    for _ in range(300):
        hyp = " ".join(rng.choice("abcd") for _ in range(rng.randint(0, 10)))
        ref = " ".join(rng.choice("abcd") for _ in range(rng.randint(0, 10)))
        for n in (1, 2):
            got = rouge_n(hyp, ref, n)
            p, r, f = rouge_n_oracle(hyp, ref, n)
            assert got.precision == pytest.approx(p, abs=1e-12)
            assert got.recall == pytest.approx(r, abs=1e-12)
            assert got.f1 == pytest.approx(f, abs=1e-12)


def test_rouge_l_matches_exhaustive_lcs():
    rng = random.Random(13)
    for _ in range(250):
        a = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
        b = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
        want = lcs_exhaustive(a, b)
        got = rouge_l(a, b)
        if a and b:
            assert got.precision == pytest.approx(want / len(a))
            assert got.recall == pytest.approx(want / len(b))
        else:
            assert got.f1 == 0.0


def test_rouge_validation():
    with pytest.raises(ValueError):
        rouge_n("a", "b", 0)


# --- QA metrics ---------------------------------------------------------------


def test_qa_normalize():
    assert qa_normalize("الوَلَد!") == "الولد"
    assert qa_normalize("  The  Answer. ") == "the answer"
    assert qa_normalize("ب,ت") == "بت"  # punctuation removed, not spaced
    assert qa_normalize("") == ""


def test_exact_match():
    assert exact_match("الوَلَد", "الولد") == 1
    assert exact_match("الولد", "البنت") == 0


def test_qa_token_f1():
    assert qa_token_f1("الولد الصغير", "الولد") == pytest.approx(2 / 3)
    assert qa_token_f1("same", "same") == 1.0
    assert qa_token_f1("", "") == 1.0
    assert qa_token_f1("", "x") == 0.0
    assert qa_token_f1("x", "") == 0.0


# --- classification ----------------------------------------------------------


def test_accuracy():
    assert accuracy([("a", "a"), ("a", "b"), ("b", "b")]) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        accuracy([])


def test_macro_f1_hand_case():
    pairs = [("a", "a"), ("a", "b"), ("b", "b")]
    assert macro_f1(pairs) == pytest.approx(2 / 3)


def test_macro_f1_absent_label_counts_zero():
    pairs = [("a", "a"), ("a", "a")]
    assert macro_f1(pairs, labels=["a", "b"]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        macro_f1(pairs, labels=[])


# --- composite score ----------------------------------------------------------

# published per-cluster benchmark tables, one CSV per system
TABLES = {
    "table_a.csv": (75.92, 77.15, 76.53),
    "table_b.csv": (74.61, 75.49, 75.05),
    "table_c.csv": (75.09, 75.56, 75.33),
    "table_d.csv": (77.08, 77.93, 77.50),
    "table_e.csv": (77.04, 78.01, 77.52),
}


def _load_rows(name):
    rows = []
    for line in (FIXTURES / name).read_text().splitlines()[1:]:
        cluster, a, b = line.split(",")
        rows.append(ClusterRow(cluster, float(a), float(b)))
    return rows


def test_arlue_score_reproduces_published_columns():
    for name, (avg_a, avg_b, score) in TABLES.items():
        got = arlue_score(_load_rows(name))
        assert isinstance(got, ArlueResult)
        assert got.avg_a == pytest.approx(avg_a, abs=0.01), name
        assert got.avg_b == pytest.approx(avg_b, abs=0.01), name
        assert got.score == pytest.approx(score, abs=0.01), name


def test_arlue_score_is_mean_of_full_precision_column_means():
    rows = [ClusterRow("x", 10.004, 20.004), ClusterRow("y", 10.004, 20.004)]
    got = arlue_score(rows)
    # rounding the column means first would give (10.0 + 20.0) / 2
    assert got.score == pytest.approx((10.004 + 20.004) / 2)


def test_arlue_score_accepts_plain_dicts_and_tuples():
    rows = [{"cluster": "x", "metric_a": 50.0, "metric_b": 70.0}]
    assert arlue_score(rows).score == pytest.approx(60.0)
    assert arlue_score([("y", 40.0, 60.0)]).score == pytest.approx(50.0)


def test_arlue_score_validation():
    with pytest.raises(ValueError):
        arlue_score([])
    with pytest.raises(ValueError):
        arlue_score([("x", 10.0, 20.0), ("x", 30.0, 40.0)])  # duplicate cluster
    with pytest.raises(ValueError):
        arlue_score([("x", -5.0, 20.0)])
    with pytest.raises(ValueError):
        arlue_score([("x", 10.0, 120.0)])


@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0, max_value=100),
            st.floats(min_value=0, max_value=100),
        ),
        min_size=1,
        max_size=10,
    )
)
@settings(max_examples=200, deadline=None)
def test_arlue_score_equals_mean_of_means(values):
    rows = [(f"c{i}", a, b) for i, (a, b) in enumerate(values)]
    got = arlue_score(rows)
    avg_a = sum(a for a, _ in values) / len(values)
    avg_b = sum(b for _, b in values) / len(values)
    assert got.avg_a == pytest.approx(avg_a)
    assert got.avg_b == pytest.approx(avg_b)
    assert got.score == pytest.approx((avg_a + avg_b) / 2)
