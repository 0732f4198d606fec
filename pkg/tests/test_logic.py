import itertools

import pytest

from marblegate import logic, netlist
from marblegate.errors import ClassificationError, SimulationTimeout, UsageError
from marblegate.physics import CollisionModel, World


@pytest.mark.parametrize(
    "a, b, expected", [(1, 0, (1, 0, 0)), (0, 1, (0, 1, 0)), (1, 1, (0, 0, 1)), (0, 0, (0, 0, 0))]
)
def test_gate_semantics(a, b, expected):
    assert logic.gate_semantics(a, b) == expected


@pytest.mark.parametrize("a, b", list(itertools.product((0, 1), repeat=2)))
def test_gate_channels_exclusive(a, b):
    pa, pb, c = logic.gate_semantics(a, b)
    assert pa + pb <= 1
    assert not c or (pa == pb == 0)


@pytest.mark.parametrize("a, b", list(itertools.product((0, 1), repeat=2)))
def test_half_adder(a, b):
    assert logic.half_adder(a, b) == (a ^ b, a & b)


@pytest.mark.parametrize("a, b, c", list(itertools.product((0, 1), repeat=3)))
def test_full_adder_is_addition(a, b, c):
    s, carry = logic.full_adder(a, b, c)
    assert 2 * carry + s == a + b + c


@pytest.mark.parametrize("bits, expected", [((1, 1, 0), (0, 1)), ((0, 1, 0), (1, 0)), ((1, 1, 1), (1, 1))])
def test_full_adder_figure_cases(bits, expected):
    assert logic.full_adder(*bits) == expected


def test_classify_empty():
    assert logic.classify_exit(World(), []) == {}


def test_classify_single_marble(gate_table):
    row = gate_table.rows[2]
    assert row.inputs == {"A": 1, "B": 0}
    assert set(logic.classify_exit(row.trace, netlist.load(netlist.bundled_path("gate")).sinks).values()) == {logic.PASS_A}


def test_classify_collided_pair(gate_table, gate_spec):
    exits = logic.classify_exit(gate_table.rows[3].trace, gate_spec.sinks)
    assert list(exits.values()) == [logic.COLLIDE, logic.COLLIDE]


def test_classify_merged_marbles_follow_successor(gate_spec):
    row = logic.run_row(gate_spec, {"A": 1, "B": 1}, model=CollisionModel.FUSION_ONLY)
    exits = logic.classify_exit(row.trace, gate_spec.sinks)
    assert exits == {"src_a.0": "AB", "src_b.0": "AB", "src_a.0+src_b.0": "AB"}


def test_timeout_and_unclassified(gate_spec):
    world = netlist.build_world(gate_spec, {"A": 1, "B": 0})
    with pytest.raises(SimulationTimeout):
        logic.classify_exit(world, gate_spec.sinks)
    narrow = netlist.CircuitSpec(gate_spec.config, gate_spec.ramps, gate_spec.latches, gate_spec.sources,
                                 [s for s in gate_spec.sinks if s.label == "AB"])
    row = logic.run_row(narrow, {"A": 1, "B": 0})
    assert row.status == "unclassified" and "src_a.0" in row.message
    with pytest.raises(ClassificationError):
        logic.classify_exit(row.trace, narrow.sinks)


def test_row_timeout_is_kept(gate_spec):
    table = logic.evaluate_truth_table(gate_spec, horizon=50.0)
    assert [r.status for r in table.rows] == ["ok", "timeout", "timeout", "timeout"]
    assert "timeout" in table.to_text()


def test_gate_table(gate_table):
    assert len(gate_table.rows) == 4
    assert logic.compare_to_oracle(gate_table, "gate") == []


def test_half_adder_table(half_spec):
    assert logic.compare_to_oracle(logic.evaluate_truth_table(half_spec), "half") == []


def test_full_adder_table(full_table, full_spec):
    assert len(full_table.rows) == 8
    assert logic.compare_to_oracle(full_table, "full") == []
    carry_sinks = [s.id for s in full_spec.sinks if s.label == logic.CARRY]
    assert len(carry_sinks) == 2
    for row in full_table.rows:
        assert sum(row.sink_counts[s] > 0 for s in carry_sinks) <= 1


def test_negative_control(gate_table):
    assert logic.compare_to_oracle(gate_table, "half")


def test_parallel_rows_match_serial(gate_spec, gate_table):
    par = logic.evaluate_truth_table(gate_spec, jobs=2)
    assert [r.outputs for r in par.rows] == [r.outputs for r in gate_table.rows]
    assert par.to_csv() == gate_table.to_csv()


def test_csv_columns(gate_table):
    lines = gate_table.to_csv().splitlines()
    assert lines[0] == "A,B,A_notB,AB,notA_B,status"
    assert lines[4] == "1,1,0,1,0,ok"


def test_classify_model(gate_spec):
    def runs(model):
        return [logic.run_row(gate_spec, a, model=model).trace for a in ({"A": 1, "B": 1}, {"A": 1, "B": 0}, {"A": 0, "B": 1})]

    assert logic.classify_model(*runs(None)) is logic.ModelVerdict.SSM
    assert logic.classify_model(*runs(CollisionModel.BBM)) is logic.ModelVerdict.BBM
    merged, a, b = runs(CollisionModel.FUSION_ONLY)
    assert logic.classify_model(merged, a, b) is logic.ModelVerdict.SSM


def test_classify_model_geometry_mismatch(gate_spec, reflector_spec):
    collided = logic.run_row(gate_spec, {"A": 1, "B": 1}).trace
    single = logic.run_row(gate_spec, {"A": 1, "B": 0}).trace
    other = logic.run_row(reflector_spec, {"A": 1}).trace
    with pytest.raises(UsageError):
        logic.classify_model(collided, single, other)
