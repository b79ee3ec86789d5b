"""Lifetime metrics, CSV traces and protocol comparison reports."""

from __future__ import annotations

import csv
import dataclasses
import io
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

CSV_HEADER = (
    "round", "alive_normal", "alive_advanced", "alive_super", "ch_count",
    "sleeping", "packets_round", "packets_cum", "residual_j",
)


def canonical_float(x: float) -> float:
    """Round to the 9 significant digits the CSV carries."""
    return float(f"{x:.9g}")


@dataclass(frozen=True, slots=True)
class TraceRow:
    round: int
    alive_normal: int
    alive_advanced: int
    alive_super: int
    ch_count: int
    sleeping: int
    packets_round: int
    packets_cum: int
    residual_j: float

    def __post_init__(self):
        # rows are kept at CSV precision so export/parse round-trips exactly
        object.__setattr__(self, "residual_j", canonical_float(self.residual_j))

    @property
    def alive(self) -> int:
        return self.alive_normal + self.alive_advanced + self.alive_super


@dataclass(frozen=True)
class Summary:
    fnd: Optional[int]
    hnd: Optional[int]
    lnd: Optional[int]
    total_packets: int
    rounds_simulated: int


@dataclass
class MetricsTrace:
    rows: list[TraceRow]
    n_nodes: int
    summary: Summary
    protocol: str = field(default="", compare=False)
    config: Any = field(default=None, compare=False, repr=False)

    @classmethod
    def from_rows(cls, rows: Sequence[TraceRow], n_nodes: int, **meta) -> "MetricsTrace":
        rows = list(rows)
        if rows:
            fnd, hnd, lnd = lifetime_summary_rows(rows, n_nodes)
            total = rows[-1].packets_cum
        else:
            fnd = hnd = lnd = None
            total = 0
        return cls(rows=rows, n_nodes=n_nodes,
                   summary=Summary(fnd, hnd, lnd, total, len(rows)), **meta)


def lifetime_summary_rows(rows: Sequence[TraceRow], n_nodes: int) -> tuple[Optional[int], ...]:
    if not rows:
        raise ValueError("lifetime summary needs a non-empty trace")
    fnd = hnd = lnd = None
    half = n_nodes // 2
    for row in rows:
        alive = row.alive
        if fnd is None and alive < n_nodes:
            fnd = row.round
        if hnd is None and alive <= half:
            hnd = row.round
        if alive == 0:
            lnd = row.round
            break
    return fnd, hnd, lnd


def lifetime_summary(trace: MetricsTrace) -> tuple[Optional[int], Optional[int], Optional[int]]:
    """(first, half, last) node death rounds; ``None`` where it never happened.

    Half means at most ``n // 2`` nodes alive.
    """
    return lifetime_summary_rows(trace.rows, trace.n_nodes)


def _format_row(row: TraceRow) -> list[str]:
    values = dataclasses.astuple(row)
    return [str(v) for v in values[:-1]] + [f"{row.residual_j:.9g}"]


def export_csv(trace: MetricsTrace, path) -> Path:
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in trace.rows:
        writer.writerow(_format_row(row))
    try:
        path.write_text(buf.getvalue(), encoding="ascii")
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc
    return path


def read_csv(path, n_nodes: Optional[int] = None) -> MetricsTrace:
    """Parse a trace written by :func:`export_csv`.

    The CSV does not store the deployment size; without ``n_nodes`` it is
    taken from the first row, which undercounts if nodes died in round 0.
    """
    path = Path(path)
    with path.open(newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(CSV_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(rec)}")
            *ints, residual = rec
            rows.append(TraceRow(*map(int, ints), float(residual)))
    if n_nodes is None:
        n_nodes = rows[0].alive if rows else 0
    return MetricsTrace.from_rows(rows, n_nodes)


# -- comparisons ----------------------------------------------------------

def _padded(rows: Sequence[TraceRow], length: int) -> list[TraceRow]:
    """Extend a trace past its end by repeating the final state."""
    if not rows or len(rows) >= length:
        return list(rows)
    last = rows[-1]
    tail = [dataclasses.replace(last, round=r, ch_count=0, sleeping=0, packets_round=0)
            for r in range(len(rows), length)]
    return list(rows) + tail


def _config_key(cfg) -> Any:
    if cfg is None:
        return None
    return dataclasses.replace(cfg, protocol=None)


@dataclass
class Comparison:
    label_a: str
    label_b: str
    summary_a: Summary
    summary_b: Summary
    deltas: dict[str, Optional[int]]
    per_round: list[tuple[int, int, int, float, float]]  # round, alive a/b, residual a/b

    def to_text(self) -> str:
        lines = [f"{'metric':<14}{self.label_a:>14}{self.label_b:>14}{'delta':>10}"]
        for key in ("fnd", "hnd", "lnd", "total_packets"):
            a = getattr(self.summary_a, key)
            b = getattr(self.summary_b, key)
            lines.append(f"{key:<14}{_fmt(a):>14}{_fmt(b):>14}{_fmt(self.deltas[key]):>10}")
        return "\n".join(lines) + "\n"

    def write_plot_data(self, path) -> Path:
        columns = {
            "round": [p[0] for p in self.per_round],
            f"alive_{self.label_a}": [p[1] for p in self.per_round],
            f"alive_{self.label_b}": [p[2] for p in self.per_round],
            f"residual_{self.label_a}": [p[3] for p in self.per_round],
            f"residual_{self.label_b}": [p[4] for p in self.per_round],
        }
        return write_columns(path, columns)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def compare_summaries(a: MetricsTrace, b: MetricsTrace) -> Comparison:
    """Side-by-side lifetime/throughput deltas (a minus b) and per-round gaps.

    Raises ``ValueError`` if both traces carry configs that differ in
    anything but the protocol.
    """
    if a.config is not None and b.config is not None and _config_key(a.config) != _config_key(b.config):
        raise ValueError("traces come from configs that differ beyond the protocol")
    deltas = {}
    for key in ("fnd", "hnd", "lnd", "total_packets"):
        va, vb = getattr(a.summary, key), getattr(b.summary, key)
        deltas[key] = None if va is None or vb is None else va - vb
    length = max(len(a.rows), len(b.rows))
    ra, rb = _padded(a.rows, length), _padded(b.rows, length)
    per_round = [(x.round, x.alive, y.alive, x.residual_j, y.residual_j) for x, y in zip(ra, rb)]
    return Comparison(a.protocol or "a", b.protocol or "b", a.summary, b.summary, deltas, per_round)


def write_columns(path, columns: Mapping[str, Sequence]) -> Path:
    """Whitespace-separated columns with a ``#`` header line."""
    path = Path(path)
    names = list(columns)
    lengths = {len(columns[k]) for k in names}
    if len(lengths) > 1:
        raise ValueError(f"column lengths differ: {sorted(lengths)}")
    lines = ["# " + " ".join(names)]
    for values in zip(*(columns[k] for k in names)):
        lines.append(" ".join(f"{v:.9g}" if isinstance(v, float) else str(v) for v in values))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


@dataclass(frozen=True)
class Stat:
    mean: Optional[float]
    std: Optional[float]
    count: int  # runs where the metric was defined


def _stat(values: Sequence[Optional[float]]) -> Stat:
    vals = [v for v in values if v is not None]
    if not vals:
        return Stat(None, None, 0)
    std = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return Stat(statistics.fmean(vals), std, len(vals))


@dataclass
class Aggregate:
    """Across-seed statistics for one protocol (sample standard deviation)."""

    label: str
    runs: int
    fnd: Stat
    hnd: Stat
    lnd: Stat
    total_packets: Stat
    mean_alive: list[float]
    mean_packets_cum: list[float]
    mean_residual: list[float]
    mean_ch_count: list[float]


def aggregate(traces: Sequence[MetricsTrace], label: str = "", length: Optional[int] = None) -> Aggregate:
    if not traces:
        raise ValueError("aggregate needs at least one trace")
    if length is None:
        length = max(len(t.rows) for t in traces)
    padded = [_padded(t.rows, length) for t in traces]

    def mean_curve(attr: str) -> list[float]:
        return [statistics.fmean(getattr(rows[r], attr) for rows in padded if r < len(rows))
                for r in range(length)]

    return Aggregate(
        label=label or traces[0].protocol,
        runs=len(traces),
        fnd=_stat([t.summary.fnd for t in traces]),
        hnd=_stat([t.summary.hnd for t in traces]),
        lnd=_stat([t.summary.lnd for t in traces]),
        total_packets=_stat([t.summary.total_packets for t in traces]),
        mean_alive=mean_curve("alive"),
        mean_packets_cum=mean_curve("packets_cum"),
        mean_residual=mean_curve("residual_j"),
        mean_ch_count=mean_curve("ch_count"),
    )


def dominance_onset(a: MetricsTrace, b: MetricsTrace) -> Optional[int]:
    """First round from which a's residual energy never drops below b's.

    Returns ``None`` if no such round exists with a strict lead somewhere
    after it (identical curves do not count as dominance).
    """
    length = max(len(a.rows), len(b.rows))
    ra, rb = _padded(a.rows, length), _padded(b.rows, length)
    onset = None
    strict = False
    for r in range(length - 1, -1, -1):
        ea, eb = ra[r].residual_j, rb[r].residual_j
        if ea < eb:
            break
        onset = r
        strict = strict or ea > eb
    return onset if strict else None


def comparison_report(groups: Mapping[str, Sequence[MetricsTrace]], outdir=None) -> str:
    """Text report over protocols (each a list of per-seed traces).

    With ``outdir`` also writes plot-data files: per-round mean alive nodes,
    cumulative packets, residual energy and CH count, and a lifetime table.
    """
    if len(groups) < 2:
        raise ValueError("compare requires >=2 protocols")
    length = max(len(t.rows) for traces in groups.values() for t in traces)
    aggs = {name: aggregate(traces, name, length) for name, traces in groups.items()}

    lines = ["protocol comparison (mean ± sample std over seeds)", ""]
    lines.append(f"{'protocol':<14}{'runs':>6}{'FND':>20}{'HND':>20}{'LND':>20}{'packets':>24}")
    for name, agg in aggs.items():
        cells = [_fmt_stat(s) for s in (agg.fnd, agg.hnd, agg.lnd, agg.total_packets)]
        lines.append(f"{name:<14}{agg.runs:>6}{cells[0]:>20}{cells[1]:>20}{cells[2]:>20}{cells[3]:>24}")
    lines.append("")
    names = list(aggs)
    ref = names[0]
    for other in names[1:]:
        lines.append(f"{ref} - {other}:")
        for key in ("fnd", "hnd", "lnd", "total_packets"):
            sa, sb = getattr(aggs[ref], key), getattr(aggs[other], key)
            delta = None if sa.mean is None or sb.mean is None else sa.mean - sb.mean
            lines.append(f"  mean {key:<14}{_fmt(delta):>14}")
    text = "\n".join(lines) + "\n"

    if outdir is not None:
        outdir = Path(outdir)
        rounds = list(range(length))
        for fname, attr in (("alive.dat", "mean_alive"), ("throughput.dat", "mean_packets_cum"),
                            ("residual.dat", "mean_residual"), ("ch_count.dat", "mean_ch_count")):
            cols = {"round": rounds}
            cols.update({name: getattr(agg, attr) for name, agg in aggs.items()})
            write_columns(outdir / fname, cols)
        lifetime = {"metric": ["fnd", "hnd", "lnd"]}
        for name, agg in aggs.items():
            lifetime[name] = [float("nan") if s.mean is None else float(s.mean)
                              for s in (agg.fnd, agg.hnd, agg.lnd)]
        write_columns(outdir / "lifetime.dat", lifetime)
    return text


def _fmt_stat(s: Stat) -> str:
    if s.mean is None:
        return "-"
    return f"{s.mean:.1f} ± {s.std:.1f}"
