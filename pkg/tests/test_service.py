"""End-to-end checks of the HTTP layer.

The endpoints are thin wrappers, so most assertions here are about the
plumbing: request validation, error-code mapping (400/404/409), and that
responses round-trip the core results faithfully.
"""

import warnings

import pytest

from argenkit import __version__
from argenkit.service.app import create_app
from argenkit.tokenizer import MODEL_VERSION

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient


@pytest.fixture()
def client(data_dir):
    return TestClient(create_app(data_dir))


def test_health(client):
    doc = client.get("/health").json()
    assert doc == {
        "status": "ok",
        "version": __version__,
        "model_format_version": MODEL_VERSION,
    }


def test_normalize_endpoint(client):
    r = client.post("/normalize", json={"texts": ["@u كَتَبَ ههههه"]})
    assert r.status_code == 200
    (item,) = r.json()["results"]
    assert item["text"] == "<USER> كتب ه"
    assert "mask_mentions" in item["applied_rules"]

    r = client.post(
        "/normalize",
        json={"texts": ["كَتَبَ ههههه"], "rules": ["strip_diacritics"]},
    )
    assert r.json()["results"][0]["text"] == "كتب ههههه"


def test_normalize_rejects_unknown_rule(client):
    r = client.post("/normalize", json={"texts": ["x"], "rules": ["no_such"]})
    assert r.status_code == 400
    assert "no_such" in r.json()["detail"]


def test_tokenizer_train_encode_decode(client):
    corpus = ["كتب الولد الدرس", "ذهب الولد الى المدرسة", "hello world"]
    model = client.post(
        "/tokenizer/train", json={"corpus": corpus, "vocab_size": 400}
    ).json()
    # a tiny corpus runs out of repeating pairs before the target size
    assert 360 <= len(model["pieces"]) <= 400
    assert model["version"] == MODEL_VERSION

    texts = ["كتب الولد", "hello هناك", ""]
    enc = client.post(
        "/tokenizer/encode", json={"model": model, "texts": texts}
    ).json()["results"]
    dec = client.post(
        "/tokenizer/decode",
        json={"model": model, "sequences": [e["ids"] for e in enc]},
    ).json()["texts"]
    assert dec == texts


def test_tokenizer_train_validation(client):
    r = client.post("/tokenizer/train", json={"corpus": ["ab"], "vocab_size": 300})
    assert r.status_code == 400
    assert "floor" in r.json()["detail"]


def test_corrupt_endpoint_start_index(client):
    tokens = [f"t{i}" for i in range(30)]
    whole = client.post(
        "/corrupt",
        json={"sequences": [tokens, tokens], "drop_rate": 0.3, "seed": 5},
    ).json()["results"]
    # batching must not change results when the caller offsets start_index
    first = client.post(
        "/corrupt",
        json={"sequences": [tokens], "drop_rate": 0.3, "seed": 5, "start_index": 0},
    ).json()["results"]
    second = client.post(
        "/corrupt",
        json={"sequences": [tokens], "drop_rate": 0.3, "seed": 5, "start_index": 1},
    ).json()["results"]
    assert whole == first + second
    assert whole[0] != whole[1]


def test_corrupt_empty_sequence_is_400(client):
    r = client.post("/corrupt", json={"sequences": [[]]})
    assert r.status_code == 400


def test_codeswitch_endpoint(client):
    payload = {
        "sequences": [["كتب", "الولد", "الدرس", "اليوم"]],
        "dictionary": {
            "كتب": "wrote",
            "الولد": "the boy",
            "الدرس": "the lesson",
            "اليوم": "today",
            "كتب الولد": "the boy wrote",
            "الولد الدرس": "boy lesson",
            "الدرس اليوم": "lesson today",
            "كتب الولد الدرس": "the boy wrote the lesson",
            "الولد الدرس اليوم": "boy lesson today",
        },
        "coverage": 0.5,
        "seed": 3,
    }
    one = client.post("/codeswitch/synthesize", json=payload).json()["results"]
    two = client.post("/codeswitch/synthesize", json=payload).json()["results"]
    assert one == two
    (ex,) = one
    spans = sorted(tuple(s) for s in ex["replaced_spans"])
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        assert e1 <= s2
    assert not ex["under_coverage"]


def test_codeswitch_missing_word_is_400(client):
    r = client.post(
        "/codeswitch/synthesize",
        json={"sequences": [["غريب"]], "dictionary": {}, "coverage": 1.0},
    )
    assert r.status_code == 400
    assert "غريب" in r.json()["detail"]


def test_overlap_endpoint(client):
    r = client.post(
        "/paraphrase/overlap",
        json={"a": "كتب الولد الدرس", "b": "كتب الولد اليوم"},
    )
    assert r.json()["overlap"] == pytest.approx(2 / 4)


def test_mine_endpoint(client):
    r = client.post(
        "/paraphrase/mine",
        json={
            "pairs": [
                ["the boy wrote the lesson tomorrow", "كتب الولد الدرس اليوم"],
                ["x", "كتب"],
                ["missing token", "كتب"],
            ],
            "dictionary": {
                "the boy wrote the lesson tomorrow": "كتب الولد الدرس غدا",
                "x": "كتب",
            },
        },
    )
    out = r.json()["results"]
    assert [p["verdict"] for p in out] == ["accepted", "sim_identical", "error"]
    assert out[0]["side_a"] == "كتب الولد الدرس اليوم"
    assert out[0]["side_b"] == "كتب الولد الدرس غدا"
    assert out[0]["similarity"] == pytest.approx(0.75)
    assert out[0]["overlap"] == pytest.approx(0.6)
    assert "missing" in out[2]["detail"]
    assert out[2]["side_b"] == ""


def test_split_endpoint(client):
    records = [f"r{i}" for i in range(10)]
    r = client.post(
        "/split", json={"records": records, "ratios": [0.8, 0.1, 0.1], "seed": 1}
    )
    doc = r.json()
    assert [len(doc["train"]), len(doc["dev"]), len(doc["test"])] == [8, 1, 1]
    assert sorted(doc["train"] + doc["dev"] + doc["test"]) == sorted(records)

    # wrong arity dies in schema validation, a bad sum in the core
    assert (
        client.post(
            "/split", json={"records": records, "ratios": [0.5, 0.5]}
        ).status_code
        == 422
    )
    bad = client.post("/split", json={"records": records, "ratios": [0.5, 0.4, 0.2]})
    assert bad.status_code == 400


def test_evaluate_endpoint(client):
    r = client.post(
        "/evaluate",
        json={
            "task": "qa",
            "hypotheses": ["الولد", "no"],
            "references": ["الوَلَد", "yes"],
        },
    )
    scores = r.json()["scores"]
    assert scores["em"] == pytest.approx(50.0)

    bad = client.post(
        "/evaluate", json={"task": "mt", "hypotheses": ["a"], "references": []}
    )
    assert bad.status_code == 400


def test_arlue_endpoint(client):
    rows = [
        {"cluster": "senti", "metric_a": 92.46, "metric_b": 93.50},
        {"cluster": "sm", "metric_a": 80.26, "metric_b": 73.59},
        {"cluster": "topic", "metric_a": 91.92, "metric_b": 93.36},
        {"cluster": "dia_b", "metric_a": 86.48, "metric_b": 85.72},
        {"cluster": "dia_r", "metric_a": 88.30, "metric_b": 87.93},
        {"cluster": "dia_c", "metric_a": 45.94, "metric_b": 38.14},
        {"cluster": "qa", "metric_a": 36.92, "metric_b": 56.17},
    ]
    doc = client.post("/arlue", json={"rows": rows}).json()
    assert doc["avg_a"] == pytest.approx(74.61, abs=0.01)
    assert doc["avg_b"] == pytest.approx(75.49, abs=0.01)
    assert doc["score"] == pytest.approx(75.05, abs=0.01)


def test_length_bins_endpoint(client):
    r = client.post(
        "/length-bins",
        json={
            "triples": [
                ["a b c", "hyp one x y", "hyp one x y"],
                ["w " * 15, "hyp two x y", "hyp two x y"],
            ],
            "boundaries": [10],
            "task": "mt",
        },
    )
    bins = r.json()["bins"]
    assert [b["label"] for b in bins] == ["<10", ">=10"]
    assert [b["count"] for b in bins] == [1, 1]
    assert bins[0]["scores"]["bleu"] == pytest.approx(100.0)


def test_stats_endpoints(client):
    doc = client.post("/stats/cs-rate", json={"texts": ["كتب hello", "world"]}).json()
    assert doc == {"rate": pytest.approx(2 / 3), "tokens": 3, "non_arabic": 2}

    doc = client.post(
        "/stats/min-words",
        json={"texts": ["كتب الولد الدرس", "كتب hi", "one two three"], "k": 2},
    ).json()
    # this endpoint counts Arabic words specifically
    assert doc["kept"] == [True, False, False]

    doc = client.post(
        "/stats/length-bins",
        json={"texts": ["a b", "c d e f", "x " * 12], "boundaries": [3, 10]},
    ).json()
    assert doc["bins"] == [
        {"label": "<3", "count": 1},
        {"label": "3-10", "count": 1},
        {"label": ">10", "count": 1},
    ]


def test_dataset_listing(client):
    ids = {d["id"] for d in client.get("/datasets").json()["datasets"]}
    assert ids == {"toy_mt", "toy_qa"}

    doc = client.get("/datasets/toy_mt").json()
    assert doc["dataset"]["task"] == "mt"
    assert doc["counts"] == {"dev": 3, "test": 3}

    assert client.get("/datasets/nope").status_code == 404


def test_runs_and_blind_test_discipline(client, mt_refs):
    body = {
        "model_id": "m1",
        "dataset_id": "toy_mt",
        "split": "test",
        "hypotheses": mt_refs,
    }
    first = client.post("/runs", json=body)
    assert first.status_code == 200
    run = first.json()["run"]
    assert run["scores"]["bleu"] == pytest.approx(100.0)
    assert run["timestamp"]

    again = client.post("/runs", json=body)
    assert again.status_code == 409

    forced = client.post("/runs", json={**body, "force": True})
    assert forced.status_code == 200

    # dev runs are never blind
    dev_body = {**body, "split": "dev"}
    assert client.post("/runs", json=dev_body).status_code == 200
    assert client.post("/runs", json=dev_body).status_code == 200

    assert len(client.get("/runs").json()["runs"]) == 4


def test_runs_validation(client, mt_refs):
    assert (
        client.post(
            "/runs",
            json={
                "model_id": "m",
                "dataset_id": "nope",
                "split": "test",
                "hypotheses": ["x"],
            },
        ).status_code
        == 404
    )
    assert (
        client.post(
            "/runs",
            json={
                "model_id": "m",
                "dataset_id": "toy_mt",
                "split": "train",
                "hypotheses": ["x"],
            },
        ).status_code
        == 404
    )
    # exactly one hypothesis source
    base = {"model_id": "m", "dataset_id": "toy_mt", "split": "dev"}
    assert client.post("/runs", json=base).status_code == 400
    assert (
        client.post(
            "/runs", json={**base, "hypotheses": mt_refs, "hyp_path": "h.txt"}
        ).status_code
        == 400
    )
    # hypothesis count must match the split
    assert (
        client.post("/runs", json={**base, "hypotheses": ["only one"]}).status_code
        == 400
    )


def test_report_endpoint(client, mt_refs):
    client.post(
        "/runs",
        json={
            "model_id": "m1",
            "dataset_id": "toy_mt",
            "split": "dev",
            "hypotheses": mt_refs,
        },
    )
    doc = client.post("/report").json()
    assert "| toy_mt |" in doc["markdown"]
    assert "**" in doc["markdown"]
    assert "**" not in doc["csv"]
    assert "bleu" in doc["csv"]
