import sys
import textwrap
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mivckit.errors import ProtocolError, SpawnError
from mivckit.solver import Sat, Session, SolverConfig, Unknown, Unsat, parse_sexprs, parse_value, tokenize

HANGING_SOLVER = textwrap.dedent(
    """
    import sys, time
    for line in sys.stdin:
        if line.startswith("(exit"):
            break
        if line.startswith("(get-info :name"):
            print('(:name "hang")', flush=True)
        elif line.startswith("(get-info"):
            print('(:version "0")', flush=True)
        elif line.startswith("(check-sat"):
            time.sleep(60)
        else:
            print("success", flush=True)
    """
)


@pytest.fixture
def session():
    with Session() as s:
        yield s


def test_check_assuming_returns_a_core_over_the_assumed_labels(session):
    session.declare("x", "int")
    session.assert_labeled("lo", "(> |x| 5)")
    session.assert_labeled("hi", "(< |x| 3)")
    session.assert_labeled("other", "(> |x| -100)")
    r = session.check_assuming(["lo", "hi", "other"])
    assert isinstance(r, Unsat)
    assert r.core == frozenset({"lo", "hi"})
    r = session.check_assuming(["lo", "other"], values=["x"])
    assert isinstance(r, Sat) and r.model["x"] > 5


def test_cores_can_be_skipped(session):
    session.declare("p", "bool")
    session.assert_labeled("a", "|p|")
    session.assert_labeled("b", "(not |p|)")
    session.assert_labeled("c", "true")
    r = session.check_assuming(["a", "b", "c"], want_core=False)
    assert isinstance(r, Unsat) and r.core == frozenset({"a", "b", "c"})


def test_push_pop_and_protocol_errors(session):
    session.declare("r", "real")
    session.push()
    session.assert_formula("(< |r| 0.0)")
    session.assert_formula("(> |r| 0.0)")
    assert isinstance(session.check(), Unsat)
    session.pop()
    assert isinstance(session.check(), Sat)
    with pytest.raises(ProtocolError):
        session.pop()
    session.assert_labeled("lab", "true")
    with pytest.raises(ProtocolError):
        session.assert_labeled("lab", "true")
    with pytest.raises(ProtocolError):
        session.check_assuming(["never_declared"])
    with pytest.raises(ProtocolError):
        session.declare("r", "int")


def test_real_values_are_exact(session):
    session.declare("r", "real")
    session.assert_formula("(= (* 3.0 |r|) -1.0)")
    r = session.check_assuming([], values=["r"])
    assert r.model["r"] == Fraction(-1, 3)


def test_zero_budget_is_unknown_without_asking(session):
    assert session.check_assuming([], timeout_ms=0) == Unknown("timeout")
    assert session.queries == 0


def test_watchdog_kills_respawns_and_replays(tmp_path):
    script = tmp_path / "hang.py"
    script.write_text(HANGING_SOLVER)
    cfg = SolverConfig(command=(sys.executable, str(script)), timeout_ms=50, watchdog_slack_ms=100)
    with Session(cfg) as s:
        assert s.identity == "hang 0"
        s.declare("p", "bool")
        s.assert_formula("|p|")
        assert s.check_assuming([]) == Unknown("timeout")
        assert s.restarts == 1 and s.timeouts == 1
        # the replayed log leaves the session usable
        s.declare("q", "bool")
        assert "q" in s.declared


def test_missing_solver_binary():
    with pytest.raises(SpawnError):
        Session(SolverConfig(command=("/nonexistent/solver",)))


def test_config_validation():
    assert SolverConfig(command="z3 -in -smt2").command == ("z3", "-in", "-smt2")
    with pytest.raises(ValueError):
        SolverConfig(timeout_ms=0)


def test_environment_overrides_the_default_command(monkeypatch):
    from mivckit.solver import default_command

    monkeypatch.setenv("MIVCKIT_SOLVER", "my-solver --flag")
    assert default_command() == ("my-solver", "--flag")


# -- s-expressions ------------------------------------------------------------------------


def test_tokenizer_handles_quoted_symbols_strings_and_comments():
    text = '((|a b| "say ""hi""") ; trailing\n x)'
    assert tokenize(text) == ["(", "(", "a b", '"say ""hi"""', ")", "x", ")"]
    assert parse_sexprs(text) == [[["a b", '"say ""hi"""'], "x"]]


@pytest.mark.parametrize("bad", ["(a", "a)"])
def test_unbalanced_output_is_a_protocol_error(bad):
    with pytest.raises(ProtocolError):
        parse_sexprs(bad)


def test_value_decoding():
    assert parse_value("true") is True
    assert parse_value(["-", "4"]) == -4
    assert parse_value(["/", "1.0", "3.0"]) == Fraction(1, 3)
    assert parse_value(["-", ["/", "1.0", "4.0"]]) == Fraction(-1, 4)
    assert parse_value("2", "real") == Fraction(2)
    with pytest.raises(ProtocolError):
        parse_value("bogus")


atoms = st.from_regex(r"[a-z][a-z0-9.]{0,5}", fullmatch=True)
sexprs = st.recursive(atoms, lambda ch: st.lists(ch, max_size=4), max_leaves=12)


def _render(sx):
    return sx if isinstance(sx, str) else "(" + " ".join(_render(x) for x in sx) + ")"


@given(sexprs)
def test_parse_inverts_render(sx):
    assert parse_sexprs(_render(sx)) == [sx]
