import json

import pytest

from argenkit.harness import DatasetSpec, save_spec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of each run."""
    lines = []
    for bucket, status in (("passed", "PASS"), ("failed", "FAIL")):
        for report in terminalreporter.stats.get(bucket, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                lines.append(f"{status}  {report.nodeid.split('::')[-1]}")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split()[-1]):
            terminalreporter.write_line(line)


@pytest.fixture
def data_dir(tmp_path):
    """A registry with one dataset per format, plus split files on disk."""
    (tmp_path / "registry").mkdir()
    (tmp_path / "mt").mkdir()
    pairs = [
        ("source one goes here", "كتب الولد الدرس في المدرسة"),
        ("source two goes here", "ذهب الرجل الى السوق صباحا"),
        ("source three goes here", "قرأت البنت كتابا جديدا اليوم"),
    ]
    for split in ("test", "dev"):
        with open(tmp_path / "mt" / f"{split}.tsv", "w", encoding="utf-8") as fh:
            for src, tgt in pairs:
                fh.write(f"{src}\t{tgt}\n")
    save_spec(
        DatasetSpec(
            id="toy_mt",
            task="mt",
            format="tsv-parallel",
            splits=(("dev", "mt/dev.tsv"), ("test", "mt/test.tsv")),
            language_pair="en-ar",
            group="mt",
        ),
        tmp_path,
    )
    (tmp_path / "qa").mkdir()
    with open(tmp_path / "qa" / "test.jsonl", "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"question": "من كتب الدرس", "context": "كتب الولد الدرس", "target": "الولد"}) + "\n")
        fh.write(json.dumps({"question": "اين ذهب الرجل", "context": "ذهب الرجل الى السوق", "target": "السوق"}) + "\n")
    save_spec(
        DatasetSpec(
            id="toy_qa",
            task="qa",
            format="jsonl",
            splits=(("test", "qa/test.jsonl"),),
            group="qa",
        ),
        tmp_path,
    )
    return tmp_path


@pytest.fixture
def mt_refs():
    return [
        "كتب الولد الدرس في المدرسة",
        "ذهب الرجل الى السوق صباحا",
        "قرأت البنت كتابا جديدا اليوم",
    ]
