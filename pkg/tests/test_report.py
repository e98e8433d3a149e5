import csv
import io
import xml.etree.ElementTree as ET
from dataclasses import replace

import pytest

from icardo.featureset import SelectorKind
from icardo.harness import GridReport
from icardo.learners import CLASSIFIER_ORDER, ClassifierKind
from icardo.metrics import percent
from icardo.report import CSV_COLUMNS, confusion_chart, csv_text, emit_report, markdown_table, selector_chart

SVG = "{http://www.w3.org/2000/svg}"


def with_failure(report, selector=SelectorKind.LASSO, k=15, classifier=ClassifierKind.MLP):
    records = [replace(r, cm=None, metrics=None, error="ConvergenceError: forced")
               if (r.selector, r.k, r.classifier) == (selector, k, classifier) else r
               for r in report.records]
    return GridReport(records, report.provenance, report.feature_sets, report.schema_version)


def table_rows(md):
    return [[c.strip() for c in line.strip().strip("|").split("|")]
            for line in md.splitlines() if line.startswith("|")]


def test_markdown_layout(full_report):
    rows = table_rows(markdown_table(full_report))
    header, rule, body = rows[0], rows[1], rows[2:]
    assert len(header) == 2 + 16 and all(len(r) == 18 for r in rows)
    assert header[:2] == ["Models", "Selector"]
    assert header[2:6] == ["10 features Accuracy", "10 features Precision", "10 features Recall",
                           "10 features F1 score"]
    assert header[-1] == "25 features F1 score"
    assert set(rule[2:]) == {"---:"}
    assert len(body) == 28
    labels = [r[0] for r in body if r[0]]
    assert labels == [f"**{k.label}**" for k in CLASSIFIER_ORDER]
    assert [r[1] for r in body[:4]] == [s.label for s in SelectorKind]


def test_markdown_values_match_records(full_report):
    body = table_rows(markdown_table(full_report))[2:]
    for b, kind in enumerate(CLASSIFIER_ORDER):
        for s, sel in enumerate(SelectorKind):
            row = body[4 * b + s]
            for j, k in enumerate((10, 15, 20, 25)):
                m = full_report.lookup(sel, k, kind).metrics
                assert row[2 + 4 * j:6 + 4 * j] == [percent(m.accuracy), percent(m.precision),
                                                    percent(m.recall), percent(m.f1)]


def test_failed_cell_renders_na(full_report):
    broken = with_failure(full_report)
    body = table_rows(markdown_table(broken))[2:]
    row = body[4 * CLASSIFIER_ORDER.index(ClassifierKind.MLP) + list(SelectorKind).index(SelectorKind.LASSO)]
    assert row[6:10] == ["NA"] * 4
    assert row[2] != "NA" and row[10] != "NA"
    lines = list(csv.DictReader(io.StringIO(csv_text(broken))))
    bad = [r for r in lines if r["accuracy"] == "NA"]
    assert len(bad) == 1 and bad[0]["classifier"] == "mlp" and bad[0]["k"] == "15"
    assert "NA" in selector_chart(broken, SelectorKind.LASSO)


def test_csv_columns_and_rows(full_report):
    rows = list(csv.reader(io.StringIO(csv_text(full_report))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 113
    first = dict(zip(rows[0], rows[1]))
    rec = full_report.records[0]
    assert float(first["accuracy"]) == rec.metrics.accuracy
    assert int(first["tp"]) + int(first["fp"]) + int(first["fn"]) + int(first["tn"]) == 91
    assert first["wall_time_ms"] == ""


def parse_svg(text):
    root = ET.fromstring(text)
    assert root.get("viewBox") == "0 0 800 480"
    assert root.find(f".//{SVG}script") is None and "<script" not in text
    return root


def test_selector_chart_groups_bars(full_report):
    root = parse_svg(selector_chart(full_report, SelectorKind.CHI2))
    bars = [r for r in root.iter(f"{SVG}rect") if r.find(f"{SVG}title") is not None]
    assert len(bars) == 4 * 7
    # bars run size-major, classifier-minor, and each height tracks accuracy
    for i, bar in enumerate(bars):
        k, kind = (10, 15, 20, 25)[i // 7], CLASSIFIER_ORDER[i % 7]
        title = bar.find(f"{SVG}title").text
        assert title.startswith(f"{kind.label} {k}:")
        acc = full_report.lookup(SelectorKind.CHI2, k, kind).metrics.accuracy
        assert float(bar.get("height")) == pytest.approx(370 * acc, abs=0.06)
    xs = [float(b.get("x")) for b in bars]
    assert xs == sorted(xs)
    texts = [t.text for t in root.iter(f"{SVG}text")]
    assert all(f"{k} features" in texts for k in (10, 15, 20, 25))
    assert all(kind.label in texts for kind in CLASSIFIER_ORDER)


def test_confusion_chart(full_report):
    best = full_report.best(n=1)[0]
    root = parse_svg(confusion_chart(best))
    labels = [t.text for t in root.iter(f"{SVG}text")]
    for name in ("TP", "FP", "FN", "TN"):
        assert name in labels


def test_emit_all_formats(tmp_path, full_report):
    written = emit_report(full_report, out_dir=tmp_path / "out")
    names = sorted(p.name for p in written)
    assert names == sorted(["report.json", "report.csv", "report.md", "accuracy_rfe.svg", "accuracy_lasso.svg",
                            "accuracy_chi2.svg", "accuracy_tree.svg", "confusion_top.svg"])
    assert GridReport.from_json((tmp_path / "out" / "report.json").read_text()).to_json() == full_report.to_json()
    for p in written:
        if p.suffix == ".svg":
            parse_svg(p.read_text())


def test_emit_is_byte_deterministic(tmp_path, full_report):
    a = emit_report(full_report, out_dir=tmp_path / "a")
    b = emit_report(full_report, out_dir=tmp_path / "b")
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]


def test_emit_empty_and_unknown(tmp_path, full_report):
    assert emit_report(full_report, formats=(), out_dir=tmp_path / "none") == []
    assert not (tmp_path / "none").exists()
    with pytest.raises(ValueError):
        emit_report(full_report, formats=("pdf",), out_dir=tmp_path)


def test_emit_only_json(tmp_path, full_report):
    written = emit_report(full_report, formats=("json",), out_dir=tmp_path)
    assert [p.name for p in written] == ["report.json"]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["report.json"]


def test_emit_unwritable_target(tmp_path, full_report):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        emit_report(full_report, formats=("csv",), out_dir=blocker / "sub")
