"""Render a GridReport as JSON, CSV, a Markdown results table and static SVG charts."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from xml.sax.saxutils import escape

from .featureset import SelectorKind
from .harness import EvalRecord, GridReport, rank_models
from .learners import CLASSIFIER_ORDER, ClassifierKind
from .metrics import METRIC_NAMES, percent

FORMATS = ("json", "csv", "markdown", "svg")
CSV_COLUMNS = ("set_id", "selector", "k", "classifier", "tp", "fp", "fn", "tn", "accuracy",
               "precision", "recall", "f1", "converged", "wall_time_ms")
METRIC_TITLES = {"accuracy": "Accuracy", "precision": "Precision", "recall": "Recall", "f1": "F1 score"}
WIDTH, HEIGHT = 800, 480
PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1",
           "#ff9da7", "#9c755f", "#bab0ac")
NA = "NA"


def _order(report: GridReport):
    cfg = report.provenance["config"]
    selectors = [SelectorKind(s) for s in cfg["selectors"]]
    classifiers = [ClassifierKind(c) for c in cfg["classifiers"]]
    classifiers.sort(key=CLASSIFIER_ORDER.index)
    return selectors, sorted(set(cfg["sizes"])), classifiers


def csv_text(report: GridReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.records:
        cm = r.cm
        m = r.metrics
        w.writerow([
            r.set_id, r.selector.value, r.k, r.classifier.value,
            *(("", "", "", "") if cm is None else (cm.tp, cm.fp, cm.fn, cm.tn)),
            *(([NA] * 4) if m is None else [repr(m.get(n)) for n in METRIC_NAMES]),
            "" if r.converged is None else str(r.converged).lower(),
            "" if r.wall_time_ms is None else repr(r.wall_time_ms),
        ])
    return buf.getvalue()


def markdown_table(report: GridReport) -> str:
    """Classifier blocks of selector rows; four metric columns per feature-set size."""
    selectors, sizes, classifiers = _order(report)
    header = ["Models", "Selector"] + [f"{k} features {METRIC_TITLES[m]}" for k in sizes for m in METRIC_NAMES]
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join(["---"] * 2 + ["---:"] * (len(header) - 2)) + "|"]
    for kind in classifiers:
        for i, sel in enumerate(selectors):
            cells = [f"**{kind.label}**" if i == 0 else "", sel.label]
            for k in sizes:
                rec = report.lookup(sel, k, kind)
                if rec is None or not rec.ok:
                    cells.extend([NA] * len(METRIC_NAMES))
                else:
                    cells.extend(percent(rec.metrics.get(m)) for m in METRIC_NAMES)
            lines.append("| " + " | ".join(cells) + " |")
    prov = report.provenance
    caption = (f"Held-out metrics in percent; seed {prov['seed']}, test fraction {prov['test_fraction']}, "
               f"{prov['n_test']} test rows, positive class {prov['positive_class']}, "
               f"split {prov['split_digest']}.")
    return caption + "\n\n" + "\n".join(lines) + "\n"


# -- SVG ---------------------------------------------------------------------

def _svg(title: str, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
            f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">')
    return "\n".join([
        head,
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        *body,
        "</svg>",
    ]) + "\n"


def _axes(left, top, right, bottom, ymax, ticks, ylabel):
    out = [f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>']
    for t in ticks:
        yy = bottom - (bottom - top) * t / ymax
        out.append(f'<line x1="{left - 4}" y1="{yy:.1f}" x2="{right}" y2="{yy:.1f}" stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{yy + 4:.1f}" text-anchor="end">{t:g}</text>')
    mid = (top + bottom) / 2
    out.append(f'<text x="18" y="{mid:.1f}" text-anchor="middle" transform="rotate(-90 18 {mid:.1f})">'
               f'{escape(ylabel)}</text>')
    return out


def selector_chart(report: GridReport, selector: SelectorKind) -> str:
    """Accuracy bars: one group per feature-set size, one bar per classifier."""
    _, sizes, classifiers = _order(report)
    left, top, right, bottom = 70, 50, 620, 420
    body = _axes(left, top, right, bottom, 100, range(0, 101, 20), "Accuracy (%)")
    group_w = (right - left) / len(sizes)
    bar_w = group_w * 0.8 / len(classifiers)
    for g, k in enumerate(sizes):
        x0 = left + g * group_w + group_w * 0.1
        for b, kind in enumerate(classifiers):
            rec = report.lookup(selector, k, kind)
            x = x0 + b * bar_w
            if rec is None or not rec.ok:
                body.append(f'<text x="{x + bar_w / 2:.1f}" y="{bottom - 4}" text-anchor="middle" '
                            f'font-size="9">{NA}</text>')
                continue
            acc = rec.metrics.accuracy * 100
            h = (bottom - top) * acc / 100
            body.append(f'<rect x="{x:.1f}" y="{bottom - h:.1f}" width="{bar_w:.1f}" height="{h:.1f}" '
                        f'fill="{PALETTE[b % len(PALETTE)]}"><title>{escape(kind.label)} {k}: '
                        f'{percent(rec.metrics.accuracy)}%</title></rect>')
        body.append(f'<text x="{left + (g + 0.5) * group_w:.1f}" y="{bottom + 18}" text-anchor="middle">'
                    f'{k} features</text>')
    body.append(f'<text x="{(left + right) / 2:.1f}" y="{bottom + 42}" text-anchor="middle">Feature set size</text>')
    for b, kind in enumerate(classifiers):
        yy = top + 10 + b * 22
        body.append(f'<rect x="640" y="{yy}" width="14" height="14" fill="{PALETTE[b % len(PALETTE)]}"/>')
        body.append(f'<text x="662" y="{yy + 12}">{escape(kind.label)}</text>')
    return _svg(f"Classifier accuracy on {selector.label} feature sets", body)


def confusion_chart(record: EvalRecord) -> str:
    """TP/FP/FN/TN counts of one cell as percentages of the test rows."""
    cm = record.cm
    left, top, right, bottom = 70, 50, 760, 420
    body = _axes(left, top, right, bottom, 100, range(0, 101, 20), "Share of test rows (%)")
    parts = (("TP", cm.tp), ("FP", cm.fp), ("FN", cm.fn), ("TN", cm.tn))
    slot = (right - left) / len(parts)
    for i, (name, count) in enumerate(parts):
        share = 100 * count / cm.total
        h = (bottom - top) * share / 100
        x = left + i * slot + slot * 0.2
        body.append(f'<rect x="{x:.1f}" y="{bottom - h:.1f}" width="{slot * 0.6:.1f}" height="{h:.1f}" '
                    f'fill="{PALETTE[i]}"/>')
        body.append(f'<text x="{x + slot * 0.3:.1f}" y="{bottom - h - 6:.1f}" text-anchor="middle">'
                    f'{count} ({percent(share / 100)}%)</text>')
        body.append(f'<text x="{x + slot * 0.3:.1f}" y="{bottom + 18}" text-anchor="middle">{name}</text>')
    title = (f"Confusion counts for {record.classifier.label} on set {record.set_id} "
             f"(accuracy {percent(record.metrics.accuracy)}%)")
    return _svg(title, body)


def emit_report(report: GridReport, formats=FORMATS, out_dir: str | Path = ".") -> list[Path]:
    """Write the requested formats into ``out_dir``; returns the paths written."""
    formats = set(formats)
    unknown = formats - set(FORMATS)
    if unknown:
        raise ValueError(f"unknown report formats: {sorted(unknown)}")
    if not formats:
        return []
    out = Path(out_dir)
    written: list[tuple[Path, str]] = []
    if "json" in formats:
        written.append((out / "report.json", report.to_json()))
    if "csv" in formats:
        written.append((out / "report.csv", csv_text(report)))
    if "markdown" in formats:
        written.append((out / "report.md", markdown_table(report)))
    if "svg" in formats:
        selectors, _, _ = _order(report)
        for sel in selectors:
            written.append((out / f"accuracy_{sel.value}.svg", selector_chart(report, sel)))
        ranked = rank_models(report)
        if ranked and ranked[0].ok:
            written.append((out / "confusion_top.svg", confusion_chart(ranked[0])))
    try:
        out.mkdir(parents=True, exist_ok=True)
        for path, text in written:
            path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {exc.filename or out}: {exc.strerror}") from exc
    return [p for p, _ in written]
