import math

import pytest
from hypothesis import given, settings, strategies as st

from hetwsn.engine import SimulationConfig, run_simulation
from hetwsn.metrics import (
    CSV_HEADER,
    MetricsTrace,
    TraceRow,
    aggregate,
    compare_summaries,
    comparison_report,
    dominance_onset,
    export_csv,
    lifetime_summary,
    read_csv,
)
from hetwsn.protocols import ProtocolKind


def make_trace(alive, n=None, residual=None, packets=None):
    n = alive[0] if n is None else n
    residual = residual or [float(a) for a in alive]
    packets = packets or [1] * len(alive)
    rows, cum = [], 0
    for r, (a, e, p) in enumerate(zip(alive, residual, packets)):
        cum += p
        rows.append(TraceRow(r, a, 0, 0, 1, 0, p, cum, e))
    return MetricsTrace.from_rows(rows, n)


def test_lifetime_no_deaths():
    assert lifetime_summary(make_trace([5, 5, 5])) == (None, None, None)


def test_lifetime_first_drop():
    assert lifetime_summary(make_trace([100, 100, 99, 99], n=100))[0] == 2


def test_lifetime_half_uses_floor():
    # n = 5: half means <= 2 alive
    assert lifetime_summary(make_trace([5, 4, 3, 2, 1, 0])) == (1, 3, 5)


def test_lifetime_empty_trace():
    with pytest.raises(ValueError):
        lifetime_summary(MetricsTrace.from_rows([], 10))


def test_export_empty(tmp_path):
    path = export_csv(MetricsTrace.from_rows([], 3), tmp_path / "t.csv")
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"


def test_export_three_rounds(tmp_path):
    path = export_csv(make_trace([3, 2, 1], residual=[1.5, 0.123456789123, 1e-12]), tmp_path / "t.csv")
    text = path.read_text()
    lines = text.splitlines()
    assert len(lines) == 4 and text.endswith("\n")
    assert lines[0] == "round,alive_normal,alive_advanced,alive_super,ch_count,sleeping,packets_round,packets_cum,residual_j"
    assert lines[2] == "1,2,0,0,1,0,1,2,0.123456789"
    assert lines[3].endswith(",1e-12")


def test_export_reports_path_on_failure(tmp_path):
    with pytest.raises(OSError, match="missing"):
        export_csv(make_trace([1]), tmp_path / "missing" / "t.csv")


def test_read_rejects_bad_header(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b\n")
    with pytest.raises(ValueError, match="header"):
        read_csv(p)


rows_strategy = st.lists(
    st.tuples(st.integers(0, 500), st.integers(0, 500), st.integers(0, 500), st.integers(0, 100),
              st.integers(0, 100), st.integers(0, 1000),
              st.floats(0, 1e3, allow_nan=False, allow_infinity=False)),
    max_size=40,
)


@settings(max_examples=50, deadline=None)
@given(rows_strategy)
def test_round_trip(tmp_path_factory, raw):
    rows, cum = [], 0
    for r, (a, b, c, ch, sl, pk, e) in enumerate(raw):
        cum += pk
        rows.append(TraceRow(r, a, b, c, ch, sl, pk, cum, e))
    n = rows[0].alive if rows else 0
    trace = MetricsTrace.from_rows(rows, n)
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    export_csv(trace, path)
    again = read_csv(path, n_nodes=n)
    assert again == trace
    export_csv(again, path.with_name("u.csv"))
    assert path.read_bytes() == path.with_name("u.csv").read_bytes()


def test_simulated_trace_round_trip_and_summary(tmp_path):
    trace = run_simulation(SimulationConfig(seed=1))
    assert lifetime_summary(trace) == (trace.summary.fnd, trace.summary.hnd, trace.summary.lnd)
    assert trace.summary.total_packets == trace.rows[-1].packets_cum
    export_csv(trace, tmp_path / "t.csv")
    assert read_csv(tmp_path / "t.csv", n_nodes=100) == trace
    cums = [row.packets_cum for row in trace.rows]
    res = [row.residual_j for row in trace.rows]
    assert cums == sorted(cums)
    assert res == sorted(res, reverse=True)


def test_compare_identical():
    t = make_trace([4, 4, 3, 0])
    report = compare_summaries(t, t)
    assert set(report.deltas.values()) == {0}
    assert all(a == b and ea == eb for _, a, b, ea, eb in report.per_round)


def test_compare_protocols(tmp_path):
    a = run_simulation(SimulationConfig(seed=2, protocol=ProtocolKind.MEECDA, max_rounds=3000))
    b = run_simulation(SimulationConfig(seed=2, protocol=ProtocolKind.EECDA_APPROX, max_rounds=3000))
    report = compare_summaries(a, b)
    assert report.deltas["total_packets"] == a.summary.total_packets - b.summary.total_packets
    assert "total_packets" in report.to_text()
    lines = report.write_plot_data(tmp_path / "cmp.dat").read_text().splitlines()
    assert lines[0] == "# round alive_meecda alive_eecda-approx residual_meecda residual_eecda-approx"
    assert len(lines) == 3001


def test_compare_rejects_mismatched_configs():
    a = run_simulation(SimulationConfig(seed=2, max_rounds=10))
    b = run_simulation(SimulationConfig(seed=3, max_rounds=10))
    with pytest.raises(ValueError):
        compare_summaries(a, b)


def test_aggregate_three_seed_example():
    traces = [
        make_trace([2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 1, 0], packets=[2] * 12),
        make_trace([2] * 20 + [1, 1, 0]),
        make_trace([2] * 40 + [0], packets=[3] * 41),
    ]
    agg = aggregate(traces, "x")
    # fnd: 10, 20, 40 -> mean 70/3, sample variance (1600 + 100 + 2500) / 9 / 2
    assert agg.fnd.mean == pytest.approx(70 / 3)
    assert agg.fnd.std == pytest.approx(math.sqrt(700 / 3))
    # lnd: 11, 22, 40
    assert agg.lnd.mean == pytest.approx(73 / 3)
    # total packets: 24, 23, 123
    assert agg.total_packets.mean == pytest.approx(170 / 3)
    assert agg.total_packets.std == pytest.approx(math.sqrt(((24 - 170 / 3) ** 2 + (23 - 170 / 3) ** 2
                                                             + (123 - 170 / 3) ** 2) / 2))
    assert len(agg.mean_alive) == 41
    assert agg.mean_alive[30] == pytest.approx(2 / 3)  # 0, 0, 2


def test_aggregate_undefined_metrics():
    agg = aggregate([make_trace([3, 3]), make_trace([3, 2])])
    assert agg.fnd.count == 1 and agg.fnd.mean == 1 and agg.fnd.std == 0.0
    assert agg.lnd.mean is None and agg.lnd.count == 0


def test_dominance_onset():
    a = make_trace([3, 3, 3, 3], residual=[5.0, 4.0, 3.5, 3.0])
    b = make_trace([3, 3, 3, 0], residual=[6.0, 4.5, 3.0, 0.0])
    assert dominance_onset(a, b) == 2
    assert dominance_onset(b, a) is None
    assert dominance_onset(a, a) is None


def test_comparison_report_files(tmp_path):
    groups = {
        "p": [make_trace([2, 2, 1, 0]), make_trace([2, 1, 0])],
        "q": [make_trace([2, 0])],
    }
    text = comparison_report(groups, tmp_path)
    assert "p - q" in text
    alive = (tmp_path / "alive.dat").read_text().splitlines()
    assert alive[0] == "# round p q"
    assert alive[1:] == ["0 2 2", "1 1.5 0", "2 0.5 0", "3 0 0"]
    assert (tmp_path / "lifetime.dat").read_text().splitlines()[0] == "# metric p q"
    for name in ("throughput.dat", "residual.dat", "ch_count.dat"):
        assert (tmp_path / name).exists()
    with pytest.raises(ValueError, match="compare requires"):
        comparison_report({"p": groups["p"]})
