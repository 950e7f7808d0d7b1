from dataclasses import replace

import numpy as np
import pytest

from relspace import scene as S


@pytest.mark.parametrize("arrangement", S.ARRANGEMENTS)
def test_same_seed_same_scene(arrangement):
    assert S.generate_scene(arrangement, 5) == S.generate_scene(arrangement, 5)
    assert S.generate_scene(arrangement, 5) != S.generate_scene(arrangement, 6)


def test_unknown_arrangement_is_rejected():
    with pytest.raises(ValueError):
        S.generate_scene("pile", 0)


@pytest.mark.parametrize("seed", range(20))
def test_stacked_objects_rest_on_their_supporter(seed):
    sc = S.generate_scene("towers", seed)
    for members in sc.structures:
        lo0, _ = sc.get(members[0]).bbox()
        assert lo0[2] == pytest.approx(0.0, abs=1e-9)
        for below, above in zip(members, members[1:]):
            assert sc.get(above).bbox()[0][2] == pytest.approx(sc.get(below).bbox()[1][2], abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_objects_never_interpenetrate(seed):
    sc = S.generate_scene("intersection", seed)
    objs = sc.objects
    for i, a in enumerate(objs):
        for b in objs[i + 1:]:
            (alo, ahi), (blo, bhi) = a.bbox(), b.bbox()
            overlap = np.minimum(ahi, bhi) - np.maximum(alo, blo)
            assert not np.all(overlap > 1e-6), (a.id, b.id)


def tower(*specs):
    """A centered stack built bottom to top from (shape, size) pairs."""
    objs, z = [], 0.0
    for k, (shape, size) in enumerate(specs):
        o = S.make_object(f"o{k + 1}", shape, size)
        h = float(o.box_half[2])
        objs.append(replace(o, position=S.Vec3(0.0, 0.5, z + h)))
        z += 2 * h
    return S.Scene(tuple(objs), "towers", 0, (tuple(o.id for o in objs),))


def test_irregular_support_topples_everything_above():
    sc = tower(("duck", "large"), ("cube", "small"), ("cube", "small"))
    assert S.object_stability(sc) == {"o1": True, "o2": False, "o3": False}
    assert S.stability_oracle(sc) == {"s0": False}
    settled = S.settle(sc)
    assert len(settled.structures) == 3 and all(S.object_stability(settled).values())


def test_centered_stack_of_flat_objects_is_stable():
    sc = tower(("cube", "large"), ("cube", "medium"), ("cube", "small"))
    assert all(S.object_stability(sc).values())
    assert S.settle(sc) is sc


def test_stacked_pair_relations_are_converse():
    sc = tower(("cube", "large"), ("cube", "small"))
    assert S.relation_oracle(sc, ("o2", "o1")) == ("above", "touching")
    assert S.relation_oracle(sc, ("o1", "o2")) == ("below", "touching")


def test_lone_object_is_not_occluded():
    sc = S.Scene((S.make_object("o1", "cube", "medium"),), "spread", 0, (("o1",),))
    assert S.occlusion_oracle(sc) == {"o1": False}


def test_object_straight_behind_a_larger_one_is_occluded():
    front = S.make_object("o1", "cube", "large", position=(0, 0, 0))
    back = S.make_object("o2", "cube", "small", position=(0, 0.3, 0))
    sc = S.Scene((front, back), "spread", 0, (("o1",), ("o2",)))
    assert S.occlusion_oracle(sc) == {"o1": False, "o2": True}


@pytest.mark.parametrize("stat, label", [(0.0, "touching"), (0.01, "touching"), (0.0100001, "not_touching"),
                                         (0.999, "not_touching"), (1.0, "far"), (3.0, "far")])
def test_distance_label_boundaries(stat, label):
    assert S.distance_label(stat) == label


@pytest.mark.parametrize("relation", S.POSITION_RELATIONS)
def test_generated_pairs_mostly_have_the_requested_relation(relation):
    # placements are perturbed on purpose, so only the majority must match
    hits = sum(S.relation_oracle(S.generate_pair(relation, seed), ("t", "r"))[0] == relation for seed in range(50))
    assert hits >= 30


def test_relation_noise_flips_labels_at_the_requested_rate():
    sc = S.generate_pair("left", 0)
    rng = np.random.default_rng(0)
    flips = sum(S.relation_oracle(sc, ("t", "r"), 0.3, rng)[0] != "left" for _ in range(2000))
    assert 0.25 < flips / 2000 < 0.35


def test_point_clouds_are_deterministic_and_near_the_box():
    sc = S.generate_scene("spread", 3)
    obj = sc.objects[0]
    a, b = S.sample_point_cloud(obj, 300, seed=1), S.sample_point_cloud(obj, 300, seed=1)
    assert np.array_equal(a.points, b.points) and a.points.shape == (300, 3)
    lo, hi = obj.bbox()
    assert np.all(a.points >= np.asarray(lo) - 0.002) and np.all(a.points <= np.asarray(hi) + 0.002)


def test_ground_truth_covers_every_ordered_pair():
    sc = S.generate_scene("intersection", 2)
    gt = S.ground_truth(sc)
    n = len(sc.objects)
    assert len(gt.relations) == n * (n - 1)
    assert set(gt.stable) == set(sc.structure_ids())
