"""Model construction, validation and LP export."""

import math

import pytest

from besched.errors import DuplicateName, ModelError, UndeclaredVariable
from besched.milp import EQ, GE, LE, Domain, LinExpr, Model, export_lp
from besched.solver import SolveOptions, solve_builtin

from oracles import parse_lp, solve_parsed_lp


def test_add_var_registers_handle():
    m = Model()
    h = m.binary("x_1")
    assert len(m.vars) == 1
    assert m.var_by_name("x_1") is h
    assert "x_1" in m


def test_add_var_bounded_continuous():
    m = Model()
    v = m.continuous("u_th_3", 0.75, 1.5)
    assert v.domain.lo == 0.75 and v.domain.hi == 1.5
    assert not v.domain.is_integral


def test_duplicate_name_rejected():
    m = Model()
    m.binary("x_1")
    with pytest.raises(DuplicateName):
        m.binary("x_1")


def test_domain_invariants():
    with pytest.raises(ModelError):
        Domain.integer(3, 1)
    with pytest.raises(ModelError):
        Domain("binary", 0.0, 2.0)
    with pytest.raises(ModelError):
        Domain.continuous(math.nan, 1.0)


def test_add_constraint_and_tags():
    m = Model()
    x1 = m.binary("x_1")
    x0 = m.binary("x_0")
    s = m.binary("start_1")
    cid = m.add_constraint(x1 - x0 - s, LE, 0.0, "unit.startstop.i=1")
    assert isinstance(cid, int)
    assert [c.tag for c in m.constraints_by_tag("unit.startstop")] == ["unit.startstop.i=1"]


def test_degenerate_row_flagged_trivially_true():
    m = Model()
    m.binary("x")
    m.add_constraint(LinExpr(), LE, 0.0, "degenerate")
    report = m.validate()
    assert ("degenerate" in [t for _, t in report.trivial_rows])
    assert not report.infeasible_rows


def test_undeclared_variable_rejected():
    m1, m2 = Model(), Model()
    foreign = m2.binary("alien")
    with pytest.raises(UndeclaredVariable):
        m1.add_constraint(foreign + 0.0, LE, 1.0, "bad")


def test_empty_tag_rejected():
    m = Model()
    x = m.binary("x")
    with pytest.raises(ModelError):
        m.add_constraint(x + 0.0, LE, 1.0, "")


def test_validate_reports():
    m = Model()
    m.binary("unused")
    m.add_constraint(LinExpr(const=0.0), EQ, 1.0, "zero_eq_one")
    report = m.validate()
    assert "unused" in report.unused_vars
    assert [t for _, t in report.infeasible_rows] == ["zero_eq_one"]
    # validate never mutates
    assert len(m.constraints) == 1 and len(m.vars) == 1


def test_validate_empty_model_empty_report():
    report = Model().validate()
    assert report.is_empty()


def test_linexpr_normalization():
    m = Model()
    x = m.binary("x")
    e = x + x + 1.0 - x * 0.5
    assert e.terms == {x.id: 1.5}
    assert e.const == 1.0
    assert all(math.isfinite(c) for c in e.terms.values())


def test_export_lp_round_trips_through_independent_solver():
    m = Model("tiny")
    x = m.binary("x")
    m.add_constraint(x + 0.0, GE, 0.3, "force")
    m.set_objective(x + 0.0)
    text = export_lp(m).text
    obj, values = solve_parsed_lp(parse_lp(text))
    assert values["x"] == pytest.approx(1.0)
    assert obj == pytest.approx(1.0)


def test_export_lp_serializes_all_senses():
    m = Model()
    a = m.continuous("a", 0, 5)
    b = m.integer("b", -2, 4)
    m.add_constraint(a + b, LE, 3.0, "le")
    m.add_constraint(a - b, GE, -1.0, "ge")
    m.add_constraint(a + 2 * b, EQ, 2.0, "eq")
    m.set_objective(a + b)
    text = export_lp(m).text
    assert " <= 3" in text and " >= -1" in text and " = 2" in text
    assert "General" in text and "Bounds" in text
    parsed = parse_lp(text)
    assert len(parsed["rows"]) == 3
    assert "b" in parsed["integers"]


def test_export_lp_deterministic():
    def build():
        m = Model("same")
        x = m.binary("x")
        u = m.continuous("u", 0, 2)
        m.add_constraint(x + u, LE, 2.0, "row")
        m.set_objective(u - x)
        return export_lp(m).text

    assert build() == build()


def test_export_lp_sanitizes_illegal_names_reversibly():
    m = Model()
    v = m.binary("fcCHP.x[1]")
    m.set_objective(v + 0.0)
    lp = export_lp(m)
    assert "fcCHP.x[1]" not in lp.text
    (clean, original), = lp.name_map.items()
    assert original == "fcCHP.x[1]"
    assert clean in lp.text


def test_exported_model_agrees_with_builtin():
    m = Model()
    xs = [m.binary(f"x{j}") for j in range(5)]
    m.add_constraint(sum(x + 0.0 for x in xs), GE, 2.0, "pick2")
    m.set_objective(sum((j + 1) * x for j, x in enumerate(xs)))
    sol = solve_builtin(m, SolveOptions(lp_backend="dense"))
    obj, _ = solve_parsed_lp(parse_lp(export_lp(m).text))
    assert sol.objective == pytest.approx(obj, abs=1e-9)


def test_evaluate_accepts_name_and_id_keys():
    m = Model()
    x = m.binary("x")
    e = 2 * x + 1.0
    assert m.evaluate(e, {"x": 1.0}) == 3.0
    assert m.evaluate(e, {x.id: 1.0}) == 3.0
