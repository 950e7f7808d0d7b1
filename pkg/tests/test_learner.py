import itertools
import time

import numpy as np
import pytest

import oracles
from relspace import learner as L
from relspace.scene import DISTANCE_RELATIONS, POSITION_RELATIONS, SHAPES, SIZES, SURFACES


def random_example(rng, roi=""):
    n = int(rng.integers(1, L.SLOTS + 1))
    ids = [f"o{i}" for i in range(n)]
    attrs = {o: (SHAPES[rng.integers(len(SHAPES))], SIZES[rng.integers(len(SIZES))],
                 SURFACES[rng.integers(len(SURFACES))]) for o in ids}
    rels = []
    for a, b in itertools.permutations(ids, 2):
        rels.append(f"obj_relation({POSITION_RELATIONS[rng.integers(7)]},{a},{b})")
        rels.append(f"obj_relation({DISTANCE_RELATIONS[rng.integers(3)]},{a},{b})")
    occluded = {o: bool(rng.integers(2)) for o in ids if rng.random() < 0.8}
    stable = bool(rng.integers(2)) if rng.random() < 0.7 else None
    return L.make_example(ids, rels, attrs, occluded, stable, roi)


def test_feature_layout():
    ex = L.make_example(["b", "a"], ["obj_relation(above,b,a)", "obj_relation(touching,b,a)"],
                        {"a": ("cube", "large", "flat"), "b": ("duck", "small", "irregular")}, {"a": True}, False)
    x = ex.x
    assert x.shape == (L.N_FEATURES,) and L.N_FEATURES == 5 * 14 + 20 * 10 + 5
    assert x[-5:].tolist() == [1, 1, 0, 0, 0]
    # members are sorted, so "a" takes slot 0
    assert x[SHAPES.index("cube")] == 1 and x[L.ATTR_WIDTH + SHAPES.index("duck")] == 1
    k = L.PAIRS.index((1, 0))
    base = 5 * L.ATTR_WIDTH + k * L.REL_WIDTH
    assert x[base + POSITION_RELATIONS.index("above")] == 1
    assert x[base + 7 + DISTANCE_RELATIONS.index("touching")] == 1
    assert ex.mask.tolist() == [1, 0, 0, 0, 0, 1] and ex.y.tolist() == [1, 0, 0, 0, 0, 0]


def test_too_many_members_is_an_error():
    with pytest.raises(ValueError):
        L.featurize_roi([f"o{i}" for i in range(6)], [], {})


@pytest.mark.parametrize("seed", range(5))
def test_loss_matches_scalar_reference(seed):
    rng = np.random.default_rng(seed)
    model = L.Model.init(seed, hidden=6)
    ex = random_example(rng)
    ref = oracles.masked_bce(model.w1.tolist(), model.b1.tolist(), model.w2.tolist(), model.b2.tolist(),
                             ex.x.tolist(), ex.y.tolist(), ex.mask.tolist())
    assert L.loss(model, ex.x, ex.y, ex.mask) == pytest.approx(ref, rel=1e-10)


def test_gradient_check_on_random_models():
    rng = np.random.default_rng(7)
    worst = max(L.gradient_check(L.Model.init(s, hidden=8), random_example(rng)) for s in range(5))
    assert worst < 1e-4


def test_gradient_check_detects_a_wrong_gradient(monkeypatch):
    real = L.gradients
    monkeypatch.setattr(L, "gradients", lambda *a: [g * 1.01 for g in real(*a)])
    ex = random_example(np.random.default_rng(1))
    ex.mask[:] = 1
    assert L.gradient_check(L.Model.init(0, hidden=4), ex) > 1e-3


def test_memorizes_a_small_random_set():
    rng = np.random.default_rng(3)
    exs = [random_example(rng) for _ in range(12)]
    model = L.train(exs, L.TrainConfig(learning_rate=0.5, epochs=1500, seed=0))
    assert L.accuracy(model, exs) == 1.0


def test_learns_a_linearly_separable_rule():
    rng = np.random.default_rng(4)
    exs = []
    for _ in range(60):
        ex = random_example(rng)
        # stable exactly when slot 0 has a flat surface
        flat = ex.x[len(SHAPES) + len(SIZES) + SURFACES.index("flat")]
        ex.y[:], ex.mask[:] = 0, 0
        ex.y[L.STABILITY], ex.mask[L.STABILITY] = flat, 1
        exs.append(ex)
    model = L.train(exs, L.TrainConfig(learning_rate=0.5, epochs=400, seed=1))
    assert L.accuracy(model, exs) == 1.0


def test_loss_decreases():
    rng = np.random.default_rng(5)
    history = []
    L.train([random_example(rng) for _ in range(20)], L.TrainConfig(0.1, 200, 0), history)
    assert history[-1] < history[0]


def test_same_seed_gives_a_bit_identical_model():
    rng = np.random.default_rng(6)
    exs = [random_example(rng) for _ in range(15)]
    cfg = L.TrainConfig(0.05, 100, 9, batch_size=4)
    a, b = L.train(exs, cfg), L.train(exs, cfg)
    assert all(np.array_equal(p, q) for p, q in zip(a.params, b.params))
    assert a.dumps() == b.dumps()


def test_model_text_round_trip_is_exact():
    m = L.Model.init(11, hidden=5)
    back = L.Model.loads(m.dumps())
    assert all(np.array_equal(p, q) for p, q in zip(m.params, back.params))
    with pytest.raises(ValueError):
        L.Model.loads("not a model")


def test_predict_marks_empty_slots():
    ex = L.make_example(["a"], [], {"a": ("cube", "small", "flat")})
    probs, labels = L.predict(L.Model.init(0), ex.x)
    assert probs.shape == (L.N_OUTPUTS,) and labels[1:L.SLOTS].tolist() == [-1] * 4
    with pytest.raises(ValueError):
        L.predict(L.Model.init(0), np.zeros(3))


@pytest.mark.parametrize("bad", [dict(learning_rate=0), dict(epochs=0)])
def test_invalid_training_config(bad):
    with pytest.raises(ValueError):
        L.TrainConfig(**bad)


def test_empty_training_set_is_an_error():
    with pytest.raises(ValueError):
        L.train([])


def test_gradient_check_runtime_is_modest():
    t0 = time.perf_counter()
    L.gradient_check(L.Model.init(0), random_example(np.random.default_rng(0)))
    assert time.perf_counter() - t0 < 10
