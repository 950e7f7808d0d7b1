import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from relspace import grounding as G
from relspace.scene import PointCloud, generate_pair, relation_oracle, sample_scene_clouds

hist = arrays(np.float64, 12, elements=st.floats(0, 10, allow_nan=False)).filter(lambda h: h.sum() > 0).map(
    lambda h: h / h.sum())


@settings(max_examples=200)
@given(hist, hist)
def test_chi_squared_is_symmetric_and_matches_reference(h, g):
    assert G.chi_squared(h, g) == pytest.approx(G.chi_squared(g, h), abs=1e-9)
    assert G.chi_squared(h, g) == pytest.approx(oracles.chi_squared(h, g), abs=1e-9)
    assert G.chi_squared(h, h) == 0.0


@settings(max_examples=200)
@given(hist, hist)
def test_intersection_is_bounded_and_matches_reference(h, g):
    v = G.histogram_intersection(h, g)
    assert -1e-12 <= v <= 1 + 1e-12
    assert v == pytest.approx(oracles.intersection(h, g), abs=1e-12)
    assert G.histogram_intersection(h, h) == pytest.approx(1.0)


def test_layout_mismatch_is_an_error():
    with pytest.raises(ValueError):
        G.chi_squared(np.ones(3) / 3, np.ones(4) / 4)


@settings(max_examples=50)
@given(st.lists(hist, min_size=1, max_size=8))
def test_msr_update_keeps_words_normalized_and_averages(observations):
    store = G.VisualWordStore()
    for h in observations:
        G.msr_update(store, "touching", h)
    word = store.distance_words["touching"]
    assert word.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(word, np.mean(observations, axis=0), atol=1e-9)
    assert store.counts["touching"] == len(observations)


def test_first_update_copies_the_histogram():
    h = np.array([0.25, 0.75])
    store = G.msr_update(G.VisualWordStore(), "left", h)
    h[0] = 9.0
    assert store.position_words["left"].tolist() == [0.25, 0.75]


@pytest.mark.parametrize("stat, label", [(0.01, "touching"), (1.0, "far"), (0.5, "not_touching")])
def test_distance_thresholds(stat, label):
    assert G.distance_from_stat(stat) == label


def _cloud(center, half=0.02, n=200, seed=0):
    rng = np.random.default_rng(seed)
    return PointCloud(np.asarray(center) + rng.uniform(-half, half, size=(n, 3)), "x")


def test_histogram_layouts_and_mass():
    a, b = _cloud((0, 0, 0)), _cloud((0, 0, 0.3))
    ph = G.build_position_histogram(a, b)
    dh = G.build_distance_histogram(a, b)
    assert ph.shape == (G.THETA_BINS, G.PHI_BINS) and dh.shape == (G.DIST_BINS,)
    assert ph.sum() == pytest.approx(1.0) and dh.sum() == pytest.approx(1.0)
    # a target straight above lands in the smallest polar-angle bins
    assert ph[:2].sum() == pytest.approx(1.0)


def test_far_clouds_fill_the_overflow_bin():
    dh = G.build_distance_histogram(_cloud((0, 0, 0)), _cloud((3, 0, 0)))
    assert dh[-1] == pytest.approx(1.0)


@pytest.mark.parametrize("center, label", [((0, 0, 0.3), "above"), ((0, 0, -0.3), "below"),
                                           ((-0.3, 0, 0), "left"), ((0.3, 0, 0), "right"),
                                           ((0, -0.3, 0), "front"), ((0, 0.3, 0), "behind")])
def test_qsr_position_on_axis_aligned_offsets(center, label):
    assert G.qsr_position(_cloud((0, 0, 0)), _cloud(center, seed=1)) == label


def test_qsr_distance_of_separated_and_touching_clouds():
    assert G.qsr_distance(_cloud((0, 0, 0)), _cloud((2.0, 0, 0))) == "far"
    assert G.qsr_distance(_cloud((0, 0, 0)), _cloud((0.04, 0, 0))) == "touching"


def test_controller_prefers_qsr_until_msr_agrees_more_often():
    conf = G.GroundingConfidence()
    assert conf.active == "QSR"
    conf = G.controller_step(conf, "left", "left", "left")
    assert conf.active == "QSR"  # ties go to QSR
    conf = G.controller_step(conf, "left", "right", "right")
    assert conf.active == "MSR"
    with pytest.raises(ValueError):
        G.controller_step(conf, "left", "left", None)


def test_store_text_round_trip():
    g = G.Grounder()
    for k in range(3):
        sc = generate_pair("above", k)
        clouds = sample_scene_clouds(sc, 100)
        pos, dist = relation_oracle(sc, ("t", "r"))
        g.feedback(clouds["r"], clouds["t"], pos, dist)
    back = G.VisualWordStore.loads(g.store.dumps())
    assert back.counts == g.store.counts
    for rel, h in g.store.position_words.items():
        assert np.array_equal(back.position_words[rel], h)
    with pytest.raises(ValueError):
        G.VisualWordStore.loads("garbage")


def test_feedback_teaches_msr_the_relation():
    g = G.Grounder()
    for rel in ("above", "left"):
        for k in range(4):
            sc = generate_pair(rel, k)
            c = sample_scene_clouds(sc, 150)
            g.feedback(c["r"], c["t"], *relation_oracle(sc, ("t", "r")))
    ref, tgt = _cloud((0, 0, 0)), _cloud((0, 0, 0.3), seed=3)
    assert G.msr_position(g.store, ref, tgt) == "above"
