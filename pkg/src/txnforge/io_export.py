"""Stable on-disk formats for runs, features, graphs and charts.

Every writer is deterministic: fixed column order, fixed float formatting,
``\\n`` line endings and no timestamps, so the same input gives the same bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .abm import Label, ModelConfig, SimRun, TransactionEvent
from .errors import DataError, UnsupportedOperationError
from .features import AgentFeatures
from .schedule import MINUTES_PER_STEP, STEPS_PER_HOUR

TRANSACTIONS_HEADER = ("step", "time_hhmm", "sender_id", "receiver_id", "amount", "sender_label")
AGENTS_HEADER = ("agent_id", "label")
EDGES_HEADER = ("source", "target", "step", "amount")
FEATURES_HEADER = ("agent_id", "label", "txn_mean_time", "num_txns", "in_degree", "out_degree")


class ArtifactIOError(OSError):
    """Reading or writing an artifact failed; the message names the path."""


class MissingArtifactError(DataError):
    """An input directory lacks a file the command needs."""


@dataclass(frozen=True)
class RunArtifacts:
    directory: Path
    transactions: Path
    agents: Path
    config: Path
    manifest: Path
    edges: Optional[Path] = None

    def files(self) -> list[Path]:
        out = [self.transactions, self.agents]
        if self.edges is not None:
            out.append(self.edges)
        return out + [self.config, self.manifest]


def step_to_hhmm(step: int) -> str:
    minutes = step * MINUTES_PER_STEP
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def format_amount(amount: Optional[float]) -> str:
    return "" if amount is None else f"{amount:.2f}"


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> str:
    data = text.encode("utf-8")
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise ArtifactIOError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return hashlib.sha256(data).hexdigest()


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactIOError(f"cannot read {path}: {exc.strerror or exc}") from exc


def file_sha256(path: str | os.PathLike) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise ArtifactIOError(f"cannot read {path}: {exc.strerror or exc}") from exc


def transactions_csv(run: SimRun) -> str:
    rows = (
        (
            e.step,
            step_to_hhmm(e.step),
            e.sender_id,
            "" if e.receiver_id is None else e.receiver_id,
            format_amount(e.amount),
            Label(e.sender_label).value,
        )
        for e in run.events
    )
    return _csv_text(TRANSACTIONS_HEADER, rows)


def write_run(run: SimRun, directory: str | os.PathLike) -> RunArtifacts:
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"cannot create {d}: {exc.strerror or exc}") from exc

    files: dict[str, tuple[str, int]] = {}
    tx = d / "transactions.csv"
    files[tx.name] = (_write(tx, transactions_csv(run)), len(run.events))
    ag = d / "agents.csv"
    files[ag.name] = (
        _write(ag, _csv_text(AGENTS_HEADER, ((i, Label(lab).value) for i, lab in run.agents))),
        len(run.agents),
    )
    edges = None
    if run.is_graph:
        edges = d / "edges.csv"
        rows = ((e.sender_id, e.receiver_id, e.step, format_amount(e.amount)) for e in run.events)
        files[edges.name] = (_write(edges, _csv_text(EDGES_HEADER, rows)), len(run.events))
    cfg = d / "config.json"
    files[cfg.name] = (_write(cfg, json.dumps(run.config.to_dict(), indent=2) + "\n"), 1)

    manifest = {
        "model_kind": run.config.model_kind.value,
        "seed": run.config.resolved_seed(),
        "n_agents": len(run.agents),
        "n_events": len(run.events),
        "files": {name: {"sha256": h, "rows": n} for name, (h, n) in files.items()},
    }
    mf = d / "manifest.json"
    _write(mf, json.dumps(manifest, indent=2) + "\n")
    return RunArtifacts(directory=d, transactions=tx, agents=ag, config=cfg, manifest=mf, edges=edges)


def read_manifest(directory: str | os.PathLike) -> dict:
    return json.loads(_read_text(Path(directory) / "manifest.json"))


def verify_manifest(directory: str | os.PathLike) -> bool:
    d = Path(directory)
    manifest = read_manifest(d)
    return all(file_sha256(d / name) == meta["sha256"] for name, meta in manifest["files"].items())


def read_run(directory: str | os.PathLike) -> SimRun:
    d = Path(directory)
    for name in ("config.json", "agents.csv", "transactions.csv"):
        if not (d / name).is_file():
            raise MissingArtifactError(f"missing run artifact {d / name}")
    config = ModelConfig.from_dict(json.loads(_read_text(d / "config.json")))
    agents = tuple(
        (int(r["agent_id"]), Label(r["label"]))
        for r in csv.DictReader(io.StringIO(_read_text(d / "agents.csv")))
    )
    events = []
    for r in csv.DictReader(io.StringIO(_read_text(d / "transactions.csv"))):
        events.append(
            TransactionEvent(
                step=int(r["step"]),
                sender_id=int(r["sender_id"]),
                receiver_id=int(r["receiver_id"]) if r["receiver_id"] else None,
                amount=float(r["amount"]) if r["amount"] else None,
                sender_label=Label(r["sender_label"]),
            )
        )
    return SimRun(config=config, agents=agents, events=tuple(events))


def features_csv(features: Sequence[AgentFeatures]) -> str:
    rows = (
        (
            f.agent_id,
            Label(f.label).value,
            "" if f.txn_mean_time is None else repr(float(f.txn_mean_time)),
            f.num_txns,
            f.in_degree,
            f.out_degree,
        )
        for f in features
    )
    return _csv_text(FEATURES_HEADER, rows)


def write_features(features: Sequence[AgentFeatures], path: str | os.PathLike) -> Path:
    path = Path(path)
    _write(path, features_csv(features))
    return path


def read_features(path: str | os.PathLike) -> list[AgentFeatures]:
    if not Path(path).is_file():
        raise MissingArtifactError(f"missing features file {path}")
    reader = csv.DictReader(io.StringIO(_read_text(Path(path))))
    if tuple(reader.fieldnames or ()) != FEATURES_HEADER:
        raise DataError(f"{path}: expected header {','.join(FEATURES_HEADER)}")
    return [
        AgentFeatures(
            agent_id=int(r["agent_id"]),
            label=Label(r["label"]),
            txn_mean_time=float(r["txn_mean_time"]) if r["txn_mean_time"] else None,
            num_txns=int(r["num_txns"]),
            in_degree=int(r["in_degree"]),
            out_degree=int(r["out_degree"]),
        )
        for r in reader
    ]


def graph_dot(run: SimRun, window_start_hour: Optional[int] = None) -> str:
    """DOT digraph with one edge per transaction.

    With ``window_start_hour`` only the four steps of that hour are kept,
    and only agents that send or receive inside the window appear as nodes.
    """
    if not run.is_graph:
        raise UnsupportedOperationError("graph export needs a graph-model run")
    events = run.events
    if window_start_hour is not None:
        if not 0 <= window_start_hour < 24:
            raise DataError(f"window start hour must be in [0, 24), got {window_start_hour}")
        lo = window_start_hour * STEPS_PER_HOUR
        events = tuple(e for e in events if lo <= e.step < lo + STEPS_PER_HOUR)
        involved = {e.sender_id for e in events} | {e.receiver_id for e in events}
        nodes = [(i, lab) for i, lab in run.agents if i in involved]
    else:
        nodes = list(run.agents)
    lines = ["digraph transactions {"]
    lines += [f'  {i} [class="{Label(lab).value}"];' for i, lab in nodes]
    lines += [
        f'  {e.sender_id} -> {e.receiver_id} [step={e.step}, amount="{format_amount(e.amount)}"];'
        for e in events
    ]
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph_dot(run: SimRun, path: str | os.PathLike, window_start_hour: Optional[int] = None) -> Path:
    path = Path(path)
    _write(path, graph_dot(run, window_start_hour))
    return path


_FILLS = {Label.NORMAL: "#4c72b0", Label.SUSPICIOUS: "#dd8452"}


def hourly_counts(run: SimRun, bin_hours: int = 1) -> dict[Label, list[int]]:
    if bin_hours < 1 or 24 % bin_hours:
        raise DataError(f"bin_hours must divide 24, got {bin_hours}")
    n_bins = 24 // bin_hours
    counts = {lab: [0] * n_bins for lab in Label}
    for e in run.events:
        counts[Label(e.sender_label)][e.step // (STEPS_PER_HOUR * bin_hours)] += 1
    return counts


def histogram_svg(run: SimRun, bin_hours: int = 1) -> str:
    counts = hourly_counts(run, bin_hours)
    n_bins = len(counts[Label.NORMAL])
    width, height = 800, 400
    left, right, top, bottom = 60, 20, 30, 50
    plot_w, plot_h = width - left - right, height - top - bottom
    peak = max(max(c) for c in counts.values()) or 1
    bar_w = plot_w / n_bins

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for lab in Label:
        out.append(f'<g class="bars-{lab.value}" fill="{_FILLS[lab]}" fill-opacity="0.6">')
        for b, c in enumerate(counts[lab]):
            h = plot_h * c / peak
            out.append(
                f'<rect class="{lab.value}" data-hour="{b * bin_hours}" data-count="{c}" '
                f'x="{left + b * bar_w:.2f}" y="{top + plot_h - h:.2f}" '
                f'width="{bar_w:.2f}" height="{h:.2f}"/>'
            )
        out.append("</g>")
    base = top + plot_h
    out.append(f'<line x1="{left}" y1="{base}" x2="{left + plot_w}" y2="{base}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{base}" stroke="black"/>')
    for b in range(n_bins):
        x = left + (b + 0.5) * bar_w
        out.append(
            f'<text x="{x:.2f}" y="{base + 15}" font-size="10" text-anchor="middle">{b * bin_hours}</text>'
        )
    out.append(
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 10}" font-size="12" '
        f'text-anchor="middle">hour of day</text>'
    )
    out.append(
        f'<text x="15" y="{top + plot_h / 2:.2f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 15 {top + plot_h / 2:.2f})">transactions (max {peak})</text>'
    )
    for k, lab in enumerate(Label):
        y = top - 15
        x = left + 10 + 120 * k
        out.append(f'<rect x="{x}" y="{y}" width="10" height="10" fill="{_FILLS[lab]}"/>')
        out.append(f'<text x="{x + 14}" y="{y + 9}" font-size="11">{lab.value}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_histogram_svg(run: SimRun, path: str | os.PathLike, bin_hours: int = 1) -> Path:
    path = Path(path)
    _write(path, histogram_svg(run, bin_hours))
    return path
