import pytest

from helpers import selected
from mivckit import DEFAULT_CATEGORIES, ElementKind, dump_ts, load, select_elements
from mivckit.errors import CalledNodeHasAssumptions, NonImportedNodeWithoutBody, NonLinearTerm
from mivckit.system import INIT_FLAG, parse_categories


def test_altitude_elements(altitude):
    kinds = [e.kind for e in altitude.elements]
    assert kinds.count(ElementKind.ASSUMPTION) == 4
    assert kinds.count(ElementKind.GUARANTEE) == 8
    assert len(selected(altitude)) == 12
    assert len(altitude.elements) == 14  # plus the two calls of imported nodes
    assert [p.label for p in altitude.properties] == ["SystemModel.R1"]
    assert altitude.by_label("Environment.E3").description.startswith("E3: Altitude does not increase")


def test_const_parameters_are_rigid(altitude):
    rigid = sorted(v.name for v in altitude.state_vars if v.rigid)
    assert {"SystemModel.DELTA", "SystemModel.S_ERROR", "SystemModel.THRESH"} <= set(rigid)
    # callee formals of const parameters are rigid too, and nothing else is
    assert all(name.rsplit(".", 1)[1] in ("THRESH", "DELTA", "S_ERROR") for name in rigid)


def test_init_flag_is_structural(altitude):
    assert str(altitude.structural_init[0]) == INIT_FLAG
    assert str(altitude.structural_trans[0]) == f"not {INIT_FLAG}"


def test_element_categories():
    assert parse_categories("assumptions, guarantees") == DEFAULT_CATEGORIES
    assert ElementKind.EQUATION in parse_categories("equations")
    with pytest.raises(ValueError):
        parse_categories("everything")


def test_equations_and_calls_become_elements_on_request(triplex):
    E = select_elements(triplex, parse_categories("equations,node_calls"))
    kinds = {triplex.elements[i].kind for i in E}
    assert kinds == {ElementKind.EQUATION, ElementKind.NODE_CALL}


TWICE = """
node imported Sensor(x: int) returns (y: int);
(*@contract guarantee "G: bounded" y >= x; *)
node Top(a: int) returns (o: bool);
(*@contract guarantee "P: ok" o; *)
  var s1, s2: int;
let
  s1 = Sensor(a);
  s2 = Sensor(a);
  o = s1 + s2 >= a + a;
tel
"""


def test_repeated_instances_are_labelled_by_path():
    ts = load(TWICE)
    guarantees = sorted(e.label for e in ts.elements if e.kind is ElementKind.GUARANTEE)
    assert guarantees == ["Top.Sensor1.G", "Top.Sensor2.G"]


def test_called_node_with_assumptions_is_rejected():
    src = """
node imported Inner(x: int) returns (y: int);
(*@contract assume "A: pos" x > 0; guarantee "G" y > 0; *)
node Top(a: int) returns (o: int);
let o = Inner(a); tel
"""
    with pytest.raises(CalledNodeHasAssumptions) as info:
        load(src)
    assert info.value.line == 5


def test_nonlinear_terms_are_rejected_with_a_position():
    with pytest.raises(NonLinearTerm) as info:
        load("node N(a, b: int) returns (c: int);\nlet c = a * b; tel")
    assert info.value.line == 2


def test_body_less_non_imported_node_is_rejected():
    with pytest.raises(NonImportedNodeWithoutBody):
        load("node N(a: int) returns (b: int);")


def test_concrete_callee_is_inlined():
    src = """
node Inc(x: int) returns (y: int);
let y = x + 1; tel
node Top(a: int) returns (o: int);
(*@contract guarantee "P" o > a; *)
let o = Inc(a); tel
"""
    ts = load(src, "Top")
    labels = {e.label for e in ts.elements}
    assert "Inc.y" in labels and "Top.Inc1" in labels


def test_dump_lists_every_element(altitude):
    text = dump_ts(altitude)
    for e in altitude.elements:
        assert e.label in text
