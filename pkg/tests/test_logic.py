import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from relspace.logic import _kernels, _search_py, kb, solver
from relspace.logic.grounder import ground, ground_text
from relspace.logic.parser import parse_program, parse_rule
from relspace.logic.planner import NoPlan, plan
from relspace.logic.reasoning import infer
from relspace.logic.terms import ProgramError
from relspace.harness.experiments import execution_example_one


def models(text):
    return {m.literals for m in solver.answer_sets(ground_text(text))}


# ---------------------------------------------------------------- parser

@pytest.mark.parametrize("text", [
    "-stable(A) :- obj_relation(above,A,B), not stable(A).",
    "p(X) :- q(X), X > 2.",
    ":- p, -p.",
    "a :+ not b.",
    "fact(c1).",
])
def test_rule_text_round_trips(text):
    assert str(parse_rule(text)) == text
    assert str(parse_rule(str(parse_rule(text)))) == text


@pytest.mark.parametrize("bad", ["p(X :- q.", "p :- q", "P :- q."])
def test_malformed_rules_are_rejected(bad):
    with pytest.raises(ProgramError):
        parse_rule(bad)


def test_comments_are_ignored():
    p = parse_program("% a comment\na. % trailing\nb :- a.")
    assert len(p.rules) == 2


# ---------------------------------------------------------------- grounding

def test_sorted_variables_range_over_their_sort():
    gp = ground_text("#sort n = 1..3. #pred p(n). #pred q(n). p(X) :- not q(X). q(2).")
    assert gp.text().splitlines() == ["p(1) :- not q(1).", "p(2) :- not q(2).", "p(3) :- not q(3).", "q(2)."]


def test_unsorted_variables_range_over_the_herbrand_universe():
    assert ground_text("p(X) :- not q(X).").text().strip() == ""
    assert "p(c) :- not q(c)." in ground_text("r(1). r(c). p(X) :- not q(X).").text()


def test_local_variable_under_default_negation():
    # B occurs only under "not": the rule reads "no B with above(A, B)"
    text = kb.signature(["a", "b"]) + kb.AXIOM_TEXT["not_above_stable"] + " obj_relation(above, a, b)."
    (m,) = solver.answer_sets(ground(parse_program(text)))
    assert "stable(b)" in m and "stable(a)" not in m


# ---------------------------------------------------------------- solver

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_solver_agrees_with_independent_enumeration(seed):
    text = oracles.random_program(random.Random(seed), max_names=5, max_rules=15)
    assert models(text) == oracles.answer_sets(text)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_every_model_is_the_least_model_of_its_reduct(seed):
    gp = ground_text(oracles.random_program(random.Random(seed)))
    for m in solver.answer_sets(gp):
        lm = solver.least_model(solver.reduct(gp, m.literals))
        assert lm is not None and {gp.atoms[a] for a in lm} == set(m.literals)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_compiled_and_pure_kernels_agree(seed):
    gp = ground_text(oracles.random_program(random.Random(seed)))
    native = solver.answer_sets(gp)
    saved, _kernels.enumerate_models = _kernels.enumerate_models, _search_py.enumerate_models
    try:
        pure = solver.answer_sets(gp)
    finally:
        _kernels.enumerate_models = saved
    assert native == pure


def test_non_monotonic_witness():
    assert models("a :- not b.") == {frozenset({"a"})}
    assert models("a :- not b. b.") == {frozenset({"b"})}


def test_even_loop_has_two_models_and_odd_loop_none():
    assert models("a :- not b. b :- not a.") == {frozenset({"a"}), frozenset({"b"})}
    assert models("a :- not a.") == set()


def test_complementary_literals_never_coexist():
    assert models("p. -p.") == set()
    assert models("p :- not -p. -p :- not p.") == {frozenset({"p"}), frozenset({"-p"})}


def test_brute_force_refuses_large_programs():
    text = " ".join(f"p{i}." for i in range(solver.BRUTE_FORCE_MAX_ATOMS + 1))
    with pytest.raises(ValueError):
        solver.brute_force_answer_sets(ground_text(text))


def test_cr_rules_apply_only_when_needed():
    (m,) = solver.solve_with_cr(ground_text("p :- not -p. -p :- q. q :+ ."))
    assert m.applied_cr == () and "p" in m
    (m,) = solver.solve_with_cr(ground_text(":- not p. p :+ ."))
    assert m.applied_cr == ("p :+ .",)


def test_no_model_without_cr_rules_is_inconsistent():
    with pytest.raises(solver.Inconsistent):
        solver.solve_with_cr(ground_text(":- not p."))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cr_applied_sets_are_cardinality_minimal(seed):
    text = oracles.abduction_instance(random.Random(seed))
    k, expected = oracles.cr_answer_sets(text)
    if k is None:
        with pytest.raises(solver.Inconsistent):
            solver.solve_with_cr(ground_text(text))
        return
    got = solver.solve_with_cr(ground_text(text))
    assert {m.literals for m in got} == {lits for lits, _ in expected}
    assert all(len(m.applied_cr) == k for m in got)


# ---------------------------------------------------------------- reasoning over scenes

def _program(objects, *axioms):
    return kb.scene_program(objects, [kb.axiom(a) for a in axioms])


def test_object_behind_nothing_is_not_occluded():
    labels = infer(_program(["a", "b"], "not_behind_visible"), ["obj_relation(behind,b,a)"], [], "occlusion").labels
    assert labels == {"a": "negative", "b": "unknown"}


def test_object_on_irregular_surface_is_unstable():
    prog = _program(["a", "b"], "not_above_stable", "irregular_unstable")
    res = infer(prog, ["obj_relation(above,a,b)", "obj_relation(below,b,a)"], ["obj_surface(b,irregular)"],
                "stability")
    assert res.labels == {"a": "negative", "b": "positive"}
    assert str(kb.axiom("irregular_unstable")) in res.fired


def test_default_yields_to_stronger_knowledge():
    prog = _program(["a", "b"], "large_on_small_default", "not_above_stable")
    facts = ["obj_size(a,large)", "obj_size(b,small)"]
    res = infer(prog, ["obj_relation(above,a,b)"], facts, "stability")
    assert res.labels["a"] == "negative"


def test_structure_label_needs_every_member():
    prog = _program(["a", "b"], "not_above_stable", "irregular_unstable")
    res = infer(prog, ["obj_relation(above,a,b)"], ["obj_surface(b,irregular)"], "stability", {"s0": ["a", "b"]})
    assert res.labels == {"s0": "negative"}


def test_unknown_task_is_rejected():
    with pytest.raises(ValueError):
        infer(_program(["a"]), [], [], "color")


# ---------------------------------------------------------------- planning

EXAMPLE_PLAN = ["pickup(rob1,duck)", "putdown(rob1,duck,table)", "pickup(rob1,white_cube)",
                "putdown(rob1,white_cube,table)", "pickup(rob1,red_can)", "putdown(rob1,red_can,white_cube)"]


def test_execution_example_plan_with_learned_constraint():
    (p,) = execution_example_one(learned=True)
    assert [a.replace(" ", "") for a in p.actions] == EXAMPLE_PLAN


def test_without_the_constraint_the_duck_is_a_valid_support():
    plans = execution_example_one(learned=False)
    steps = {tuple(a.replace(" ", "") for a in p.actions) for p in plans}
    assert tuple(EXAMPLE_PLAN) in steps
    assert any("putdown(rob1,white_cube,duck)" in s for s in steps)


def test_plan_reports_no_plan_below_the_minimal_horizon():
    sd = kb.tabletop_domain({"x": ("medium", "flat"), "y": ("medium", "flat")})
    from relspace.logic.kb import initial_history
    with pytest.raises(NoPlan):
        plan(sd, initial_history(sd, {"x": "table", "y": "table"}), ["on(x, y)"], 1)
    plans, horizon = plan(sd, initial_history(sd, {"x": "table", "y": "table"}), ["on(x, y)"], 3)
    assert horizon == 2 and len(plans) == 1


def test_backend_flag_names_a_kernel():
    assert _kernels.BACKEND in ("cython", "python")
