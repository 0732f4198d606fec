import csv
import io
import json
import xml.etree.ElementTree as ET

import pytest

from marblegate import netlist
from marblegate.cli import main, parse_assignment
from marblegate.errors import UsageError
from marblegate.trace import CSV_HEADER, record


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_collision(tmp_path, capsys):
    svg = tmp_path / "out.svg"
    code, out, _ = run(capsys, "simulate", "gate.lmc", "--in", "A=1,B=1", "--svg", str(svg))
    assert code == 0
    assert out.count("AB") == 2
    root = ET.parse(svg).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polyline")) == 2
    assert len(root.findall(f"{ns}line")) == 2
    assert len([r for r in root.findall(f"{ns}rect") if r.get("class") == "sink"]) == 3


def test_simulate_no_marbles(capsys):
    code, out, _ = run(capsys, "simulate", "gate.lmc", "--in", "A=0,B=0")
    assert code == 0 and "no marbles" in out


def test_simulate_bad_netlist(tmp_path, capsys):
    bad = tmp_path / "bad.lmc"
    bad.write_text("ramp r slope=16deg\nwidget w\n")
    code, _, err = run(capsys, "simulate", str(bad))
    assert code == 1
    assert ":1:" in err and ":2:" in err


def test_simulate_runtime_failure(capsys):
    code, _, err = run(capsys, "simulate", "gate.lmc", "--in", "A=1", "--until", "100")
    assert code == 2 and "still" in err


def test_trace_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(capsys, "simulate", "gate.lmc", "--in", "A=1,B=1", "--trace", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    rows = list(csv.reader(io.StringIO(paths[0].read_text())))
    assert ",".join(rows[0]) == CSV_HEADER
    by_id = {}
    for r in rows[1:]:
        by_id.setdefault(r[1], []).append(float(r[0]))
    for times in by_id.values():
        assert times == sorted(times)


def test_trace_sampling_rate(gate_spec):
    trace = record(netlist.build_world(gate_spec, {"A": 1, "B": 0}))
    times = [r.t for r in trace.records]
    gaps = {round(b - a, 6) for a, b in zip(times, times[1:])}
    assert max(gaps) <= 1000 / 120 + 0.05
    assert trace.records[-1].state == "sunk"


def test_truthtable_expect(capsys):
    code, out, err = run(capsys, "truthtable", "gate.lmc", "--expect", "gate")
    assert code == 0 and "4/4" in err
    code, out, err = run(capsys, "truthtable", "gate.lmc", "--expect", "half")
    assert code == 3 and "mismatch" in err


def test_truthtable_csv(capsys):
    code, out, _ = run(capsys, "truthtable", "half_adder", "--csv")
    assert code == 0
    assert out.splitlines()[0] == "A,B,Sum,Carry,status"


def test_truthtable_timeout_exit(capsys):
    code, out, _ = run(capsys, "truthtable", "gate.lmc", "--until", "50")
    assert code == 2 and "timeout" in out


def test_repro_only_json(capsys):
    code, out, _ = run(capsys, "repro", "--only", "evaporation", "--json")
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert [r["key"] for r in report["results"]] == ["evaporation"]


def test_repro_unknown_check(capsys):
    code, _, err = run(capsys, "repro", "--only", "nonsense")
    assert code == 1 and "nonsense" in err


def test_parse_assignment():
    assert parse_assignment("A=1", ["A", "B"]) == {"A": 1, "B": 0}
    with pytest.raises(UsageError):
        parse_assignment("C=1", ["A", "B"])
    with pytest.raises(UsageError):
        parse_assignment("A=2", ["A", "B"])
