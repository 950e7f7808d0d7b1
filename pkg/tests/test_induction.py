import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from relspace import induction as I
from relspace.harness.experiments import _EvalScenes, _scenes
from relspace.logic import kb

NOT_ABOVE = kb.AXIOM_TEXT["not_above_stable"]
NOT_BEHIND = kb.AXIOM_TEXT["not_behind_visible"]
IRREGULAR = kb.AXIOM_TEXT["irregular_unstable"]
OVER_SPECIFIED = "-occluded(A) :- not obj_relation(behind, A, B), obj_relation(above, A, C)."


def example(label, **attrs):
    base = {a: False for a in I.VOCABULARY}
    base.update(attrs)
    return I.RelationalExample(base, label)


def stability_data(rng, n=200):
    """Not above anything: stable. On an irregular object: unstable. Otherwise a coin flip."""
    out = []
    for _ in range(n):
        above = rng.random() < 0.7
        irregular = above and rng.random() < 0.4
        size = ("small", "medium", "large")[rng.integers(3)]
        if not above:
            label = "stable"
        elif irregular:
            label = "unstable"
        else:
            label = "stable" if rng.random() < 0.5 else "unstable"
        out.append(example(label, rel_above=above, irregular_below=irregular, **{f"size_{size}": True},
                           rel_touching=above, rel_left=bool(rng.random() < 0.3)))
    return out


# ---------------------------------------------------------------- attributes and trees

def test_describe_reads_partners_inside_the_region():
    attrs = {"a": ("cube", "large", "flat"), "b": ("duck", "small", "irregular"), "c": ("cube", "small", "flat")}
    d = I.describe("a", ["a", "b"], ["obj_relation(above,a,b)", "obj_relation(left,a,c)"], attrs)
    assert d["rel_above"] and d["irregular_below"] and d["small_base"] and d["size_large"]
    assert not d["rel_left"]  # c is outside the region
    assert set(d) == set(I.VOCABULARY)


@pytest.mark.parametrize("counts, h", [([5, 5], 1.0), ([4, 0], 0.0), ([1, 1, 1, 1], 2.0), ([3, 1], 0.811278)])
def test_entropy_values(counts, h):
    assert I.entropy(counts) == pytest.approx(h, abs=1e-6)


def test_information_gain_of_a_perfect_split():
    exs = [example("stable", rel_above=False)] * 4 + [example("unstable", rel_above=True)] * 4
    assert I.information_gain(exs, "rel_above") == pytest.approx(1.0)
    assert I.information_gain(exs, "rel_left") == pytest.approx(0.0)


def _check_greedy(node, exs):
    if node.is_leaf:
        return
    gains = {a: I.information_gain(exs, a) for a in exs[0].attributes}
    assert node.gain >= max(gains.values()) - 1e-9
    for v, child in node.children.items():
        _check_greedy(child, [e for e in exs if e.attributes[node.attribute] == v])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_every_split_has_the_best_gain(seed):
    exs = stability_data(np.random.default_rng(seed), 80)
    _check_greedy(I.build_tree(exs, significance=False), exs)


def test_significance_stops_splits_on_noise():
    rng = np.random.default_rng(0)
    exs = [example("stable" if rng.random() < 0.5 else "unstable", rel_left=bool(rng.random() < 0.5))
           for _ in range(40)]
    assert I.build_tree(exs).is_leaf


def test_empty_tree_is_an_error():
    with pytest.raises(ValueError):
        I.build_tree([])


def test_collapse_merges_agreeing_leaves():
    exs = [example("unstable", rel_above=False)] * 10
    exs += [example("stable", rel_above=True)] * 10
    exs += [example("stable", rel_above=True, rel_left=True)] * 6
    exs += [example("unstable", rel_above=True, rel_left=True)] * 4
    plain = I.build_tree(exs, significance=False)
    collapsed = I.build_tree(exs, significance=False, collapse=True)
    assert plain.depth() == 2 and collapsed.depth() == 1
    assert collapsed.children[True].counts == Counter(stable=16, unstable=4)


# ---------------------------------------------------------------- candidates

def test_candidate_text_for_normal_and_default_kinds():
    c = I.CandidateAxiom("unstable", (("irregular_below", True),))
    assert I.canonical(c.text) == I.canonical(IRREGULAR)
    d = I.CandidateAxiom("unstable", (("small_base", True),), "default")
    assert d.text.endswith("not stable(A).")
    assert I.CandidateAxiom("stable", (("rel_above", False),)).text == "stable(A) :- not obj_relation(above, A, B)."


def test_two_positive_relations_get_distinct_partners():
    c = I.CandidateAxiom("unstable", (("rel_above", True), ("rel_left", True)))
    assert "obj_relation(above, A, B)" in c.body and "obj_relation(left, A, C)" in c.body


def test_implied_tests_are_simplified_away():
    assert I.simplify((("irregular_below", True), ("rel_above", True))) == (("irregular_below", True),)
    assert I.simplify((("irregular_below", False), ("rel_above", False))) == (("rel_above", False),)


def test_extracted_axioms_are_faithful_to_their_training_set():
    exs = stability_data(np.random.default_rng(1))
    for c in I.extract_candidates(I.build_tree(exs), 0.95, 0.05, len(exs)):
        hits = [e for e in exs if c.matches(e.attributes)]
        assert sum(e.label == c.label for e in hits) / len(hits) >= 0.95


def test_validation_drops_contradicted_and_unsupported_axioms():
    c = I.CandidateAxiom("stable", (("rel_above", False),))
    good = [example("stable", rel_above=False)] * 10
    assert I.validate([c], good, 0.05) == [c]
    assert I.validate([c], [example("unstable", rel_above=False)] * 10, 0.05) == []
    assert I.validate([c], [example("stable", rel_above=True)] * 10, 0.05) == []


def test_ensemble_recovers_the_generating_stability_axioms():
    exs = stability_data(np.random.default_rng(2), 300)
    got = {I.canonical(c.text) for c in I.ensemble_induce(exs, I.InductionConfig(seed=0))}
    assert got == {I.canonical(NOT_ABOVE), I.canonical(IRREGULAR)}


def test_ensemble_needs_enough_examples():
    with pytest.raises(ValueError):
        I.ensemble_induce([example("stable")] * 5)


def test_raising_th3_never_adds_axioms():
    exs = stability_data(np.random.default_rng(3), 120)
    sets = [{c.text for c in I.ensemble_induce(exs, I.InductionConfig(th3=t, ensemble_count=30, seed=4))}
            for t in (0.2, 0.5, 0.8, 1.0)]
    assert all(b <= a for a, b in zip(sets, sets[1:]))


def test_single_member_ensemble_is_one_extract_and_validate():
    exs = stability_data(np.random.default_rng(5), 100)
    got = I.ensemble_induce(exs, I.InductionConfig(ensemble_count=1, th3=1.0, seed=8))
    order = np.random.default_rng(8).permutation(len(exs))
    train, held = [exs[i] for i in order[:50]], [exs[i] for i in order[50:]]
    direct = I.validate(I.extract_candidates(I.build_tree(train), 0.95, 0.05, 50), held, 0.05)
    assert sorted(c.text for c in got) == sorted(c.text for c in direct)


# ---------------------------------------------------------------- strength

def test_strength_values():
    store = I.AxiomStore()
    store.add(NOT_ABOVE)
    rec = store.records[I.canonical(NOT_ABOVE)]
    assert rec.strength == 1.0
    I.update_strength(store)
    assert rec.strength == pytest.approx(0.3679, abs=1e-4)
    rec.alpha, rec.n = 0.5, 1
    I.update_strength(store)
    assert rec.strength == pytest.approx(math.exp(-1))


def test_unreinforced_axiom_is_pruned_at_cycle_three():
    store = I.AxiomStore()
    store.add(NOT_ABOVE)
    trace = []
    for _ in range(3):
        I.advance(store)
        rec = store.records.get(I.canonical(NOT_ABOVE))
        trace.append(rec.strength if rec else None)
    expected = oracles.strength_trace(4)
    assert trace[:2] == pytest.approx(expected[:2]) and trace[2] is None
    assert expected[2] < 0.1 and (3, "pruned", I.canonical(NOT_ABOVE)) in store.log


def test_axiom_reinforced_every_cycle_survives_at_full_strength():
    store = I.AxiomStore()
    store.add(NOT_ABOVE)
    for _ in range(9):
        I.advance(store)
        I.reinforce(store, NOT_ABOVE)
        assert store.records[I.canonical(NOT_ABOVE)].strength == 1.0
    assert store.cycle == 9 and NOT_ABOVE in store


def test_reinforcement_divisor_shrinks_with_age():
    store = I.AxiomStore()
    rec = store.add(NOT_ABOVE)
    store.cycle = 1
    I.reinforce(store, NOT_ABOVE)
    assert rec.alpha == pytest.approx(0.5)
    store.cycle = 101
    assert I.reinforcement_divisor(store, rec) == pytest.approx(2 ** (1 / 101))


def test_reinforce_counts_once_per_cycle_and_rejects_unknown():
    store = I.AxiomStore()
    rec = store.add(NOT_ABOVE)
    store.cycle = 1
    I.reinforce(store, NOT_ABOVE)
    I.reinforce(store, NOT_ABOVE)
    assert rec.reinforcements == 1 and rec.alpha == pytest.approx(0.5)
    with pytest.raises(KeyError):
        I.reinforce(store, IRREGULAR)


def test_strength_exactly_at_threshold_is_kept():
    store = I.AxiomStore()
    store.add(NOT_ABOVE).strength = 0.10
    assert NOT_ABOVE in I.prune(store, 0.10)


def test_store_text_round_trip():
    store = I.AxiomStore()
    store.add(NOT_ABOVE)
    I.advance(store)
    store.add(IRREGULAR)
    I.reinforce(store, NOT_ABOVE)
    back = I.AxiomStore.loads(store.dumps())
    assert back.cycle == store.cycle and back.records == store.records
    with pytest.raises(ValueError):
        I.AxiomStore.loads("nope")


# ---------------------------------------------------------------- merging

def test_similarity_needs_same_head_and_shared_content():
    assert I._similar(NOT_BEHIND, OVER_SPECIFIED)
    assert not I._similar(NOT_ABOVE, IRREGULAR)
    # defaults share only the marker literal, which does not count
    a = "-stable(A) :- obj_size(A, large), not stable(A)."
    b = "-stable(A) :- obj_relation(left, A, B), not stable(A)."
    assert not I._similar(a, b)


def test_disjoint_heads_are_all_retained():
    store = I.add_merge(I.AxiomStore(), [NOT_ABOVE, NOT_BEHIND, IRREGULAR], [None], lambda t, s: 0.5)
    assert len(store) == 3


def test_score_ties_go_to_the_shorter_body():
    store = I.AxiomStore()
    store.add(OVER_SPECIFIED)
    I.add_merge(store, [NOT_BEHIND], [None], lambda t, s: 1.0)
    assert store.texts() == [I.canonical(NOT_BEHIND)]


def test_merge_needs_evaluation_scenes():
    with pytest.raises(ValueError):
        I.add_merge(I.AxiomStore(), [NOT_ABOVE], [], lambda t, s: 0.0)


def test_relearned_axiom_is_reinforced():
    store = I.AxiomStore()
    rec = store.add(NOT_ABOVE)
    I.advance(store)
    I.add_merge(store, [NOT_ABOVE], [None], lambda t, s: 1.0)
    assert rec.strength == 1.0 and rec.reinforcements == 1


def test_execution_example_two_keeps_the_general_version():
    base = kb.base_axioms(exclude=("not_behind_visible",))
    evaluator = _EvalScenes(_scenes(3, 9, 10))
    scores = {t: evaluator(base, [t]) for t in (NOT_BEHIND, OVER_SPECIFIED)}
    assert scores[NOT_BEHIND] > scores[OVER_SPECIFIED]
    store = I.AxiomStore()
    store.add(OVER_SPECIFIED)
    I.add_merge(store, [NOT_BEHIND], range(10), lambda texts, _: evaluator(base, texts))
    assert store.texts() == [I.canonical(NOT_BEHIND)]
    assert (0, "merged_out", I.canonical(OVER_SPECIFIED)) in store.log
    assert store.records[I.canonical(NOT_BEHIND)].strength == 1.0
    assert store.records[I.canonical(NOT_BEHIND)].alpha == 1.0


def test_merge_never_lowers_accuracy_below_the_stored_members():
    base = kb.base_axioms(exclude=("not_behind_visible",))
    evaluator = _EvalScenes(_scenes(4, 9, 10))
    store = I.AxiomStore()
    store.add(OVER_SPECIFIED)
    before = evaluator(base, store.texts())
    I.add_merge(store, [NOT_BEHIND], range(10), lambda texts, _: evaluator(base, texts))
    assert evaluator(base, store.texts()) >= before


def test_label_counts_in_leaves_sum_to_node_size():
    exs = stability_data(np.random.default_rng(6), 60)
    tree = I.build_tree(exs)
    assert sum(leaf.size for _, leaf in tree.leaves()) == len(exs)
    assert tree.counts == Counter(e.label for e in exs)
