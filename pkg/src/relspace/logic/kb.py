"""Domain knowledge for tabletop scenes: signature, background rules and axioms."""
from __future__ import annotations

from ..scene import COLORS, DISTANCE_RELATIONS, POSITION_RELATIONS, SHAPES, SIZES, SURFACES
from .parser import parse_program, parse_rule
from .terms import Program, Rule

RELATIONS = POSITION_RELATIONS + DISTANCE_RELATIONS
MAX_HEIGHT = 5

# axioms the reasoner starts from; the first three are the ones removed for induction runs
AXIOM_TEXT = {
    "not_above_stable": "stable(A) :- not obj_relation(above, A, B).",
    "not_behind_visible": "-occluded(A) :- not obj_relation(behind, A, B).",
    "irregular_unstable": "-stable(A) :- obj_relation(above, A, B), obj_surface(B, irregular).",
    "large_on_small_default": (
        "-stable(A) :- obj_relation(above, A, B), obj_size(A, large), obj_size(B, small), not stable(A)."
    ),
    "behind_occluded_default": "occluded(A) :- obj_relation(behind, A, B), not -occluded(A).",
}
TARGET_AXIOMS = ("not_above_stable", "not_behind_visible", "irregular_unstable")

BACKGROUND = """
irregular_below(A) :- obj_relation(above, A, B), obj_surface(B, irregular).
small_base(A) :- obj_relation(above, A, B), obj_size(A, large), obj_size(B, small).
tall_tower(A) :- tower_height(A, N), N > 4.
"""

# predicates whose truth can change between time steps when axioms are used for planning
FLUENT_PREDS = frozenset({"obj_relation", "stable", "occluded", "irregular_below", "small_base"})


def signature(object_ids) -> str:
    objs = ", ".join(object_ids)
    return f"""
#sort object = {{{objs}}}.
#sort relation = {{{', '.join(RELATIONS)}}}.
#sort shape = {{{', '.join(SHAPES)}}}.
#sort size = {{{', '.join(SIZES)}}}.
#sort surface = {{{', '.join(SURFACES)}}}.
#sort color = {{{', '.join(COLORS)}}}.
#sort height = 1..{MAX_HEIGHT}.
#pred obj_relation(relation, object, object).
#pred obj_shape(object, shape).
#pred obj_size(object, size).
#pred obj_surface(object, surface).
#pred obj_color(object, color).
#pred tower_height(object, height).
#pred stable(object).
#pred occluded(object).
#pred irregular_below(object).
#pred small_base(object).
#pred tall_tower(object).
"""


def scene_base(object_ids) -> Program:
    """Signature and background rules for a scene with the given objects."""
    return parse_program(signature(object_ids) + BACKGROUND)


def axiom(name_or_text: str) -> Rule:
    return parse_rule(AXIOM_TEXT.get(name_or_text, name_or_text))


def base_axioms(exclude=()) -> list[Rule]:
    return [axiom(n) for n in AXIOM_TEXT if n not in exclude]


def scene_program(object_ids, axioms, facts=()) -> Program:
    """A complete program: signature, background, axioms and ground facts."""
    base = scene_base(object_ids)
    text = "\n".join(str(a) for a in axioms) + "\n" + "\n".join(f if f.endswith(".") else f + "." for f in facts)
    return parse_program(text, base)


def attribute_facts(scene) -> list[str]:
    out = []
    for o in scene.objects:
        out += [f"obj_shape({o.id},{o.shape})", f"obj_size({o.id},{o.size})",
                f"obj_surface({o.id},{o.surface})", f"obj_color({o.id},{o.color})"]
    return out


def height_facts(object_ids, relation_facts) -> list[str]:
    """``tower_height(A, N)``: A plus the number of objects it is perceived above."""
    count = {o: 1 for o in object_ids}
    for f in relation_facts:
        if f.startswith("obj_relation(above,"):
            a = f[len("obj_relation(above,"):].split(",")[0]
            count[a] += 1
    return [f"tower_height({o},{min(n, MAX_HEIGHT)})" for o, n in count.items()]


# ---------------------------------------------------------------- planning domain

def tabletop_domain(objects: dict, robot: str = "rob1"):
    """Pick-and-place domain over ``objects`` (id -> (size, surface)) and a table."""
    from .al import CausalLaw, Executability, StateConstraint, SystemDescription

    ids = ", ".join(objects)
    sig = f"""
#sort robot = {{{robot}}}.
#sort location = {{table}}.
#sort object : location = {{{ids}}}.
#sort vrel = {{above, below}}.
#sort relation = {{{', '.join(RELATIONS)}}}.
#sort size = {{{', '.join(SIZES)}}}.
#sort surface = {{{', '.join(SURFACES)}}}.
#pred obj_size(object, size).
#pred obj_surface(object, surface).
"""
    static = "".join(f"obj_size({o}, {sz}).\nobj_surface({o}, {sf}).\n" for o, (sz, sf) in objects.items())
    return SystemDescription(
        signature=sig,
        inertial=("on(object, location)", "in_hand(robot, object)"),
        defined=("obj_relation(vrel, object, object)", "irregular_below(object)", "small_base(object)"),
        open=("stable(object)",),
        actions=("pickup(robot, object)", "putdown(robot, object, location)"),
        causal_laws=[
            CausalLaw("pickup(R, O)", "in_hand(R, O)"),
            CausalLaw("putdown(R, O, L)", "on(O, L)"),
            CausalLaw("putdown(R, O, L)", "-in_hand(R, O)"),
        ],
        state_constraints=[
            StateConstraint("-on(O, L2)", ("on(O, L1)", "L1 != L2")),
            StateConstraint("-on(O, L)", ("in_hand(R, O)",)),
            StateConstraint("obj_relation(above, A, B)", ("on(A, B)",)),
            StateConstraint("obj_relation(above, A, B)", ("on(A, C)", "obj_relation(above, C, B)")),
            StateConstraint("obj_relation(below, B, A)", ("obj_relation(above, A, B)",)),
            StateConstraint("irregular_below(A)", ("obj_relation(above, A, B)", "obj_surface(B, irregular)")),
            StateConstraint("small_base(A)", ("obj_relation(above, A, B)", "obj_size(A, large)",
                                              "obj_size(B, small)")),
            StateConstraint("", ("-stable(A)",)),
        ],
        executability=[
            Executability("pickup(R, O)", ("in_hand(R, O2)",)),
            Executability("pickup(R, O)", ("on(O2, O)",)),
            Executability("putdown(R, O, L)", ("not in_hand(R, O)",)),
            Executability("putdown(R, O, L)", ("on(O2, L)", "L != table")),
            Executability("putdown(R, O, L)", ("O = L",)),
        ],
        static_rules=static,
    )


def initial_history(sd, placement: dict, robot: str = "rob1"):
    """Complete initial state: ``placement`` maps each object to what it rests on."""
    from .al import History

    h = History()
    locs = ["table"] + list(placement)
    for o, under in placement.items():
        for loc in locs:
            if loc != o:
                h.initial(f"on({o}, {loc})", loc == under)
        h.initial(f"in_hand({robot}, {o})", False)
    return h


def planning_axioms(axioms) -> list[Rule]:
    """Stability axioms, usable as temporal state constraints."""
    return [a for a in axioms if a.head is not None and a.head.pred == "stable"]
