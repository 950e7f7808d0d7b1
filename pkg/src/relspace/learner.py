"""A small feed-forward classifier over region-of-interest features.

Features: for each of 5 slots a one-hot block of shape (9), size (3)
and surface (2); for each of the 20 ordered slot pairs a one-hot
position relation (7) and distance relation (3); a 5-entry presence
mask. Outputs: per-slot occlusion (5) and structure stability (1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import MAX_MEMBERS, parse_relation
from .scene import DISTANCE_RELATIONS, POSITION_RELATIONS, SHAPES, SIZES, SURFACES

SLOTS = MAX_MEMBERS
ATTR_WIDTH = len(SHAPES) + len(SIZES) + len(SURFACES)
PAIRS = [(i, j) for i in range(SLOTS) for j in range(SLOTS) if i != j]
REL_WIDTH = len(POSITION_RELATIONS) + len(DISTANCE_RELATIONS)
N_FEATURES = SLOTS * ATTR_WIDTH + len(PAIRS) * REL_WIDTH + SLOTS
N_OUTPUTS = SLOTS + 1
STABILITY = SLOTS
HIDDEN = 32
MODEL_HEADER = "relspace_mlp 1"

_PAIR_INDEX = {p: k for k, p in enumerate(PAIRS)}
_REL_INDEX = {r: k for k, r in enumerate(POSITION_RELATIONS + DISTANCE_RELATIONS)}


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 2000
    seed: int = 0
    batch_size: int = 0  # 0 = full batch
    hidden: int = HIDDEN

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs <= 0:
            raise ValueError("learning rate and epochs must be positive")


@dataclass
class Example:
    x: np.ndarray
    y: np.ndarray
    mask: np.ndarray
    roi: str = ""


def _attrs(a):
    if isinstance(a, dict):
        return a["shape"], a["size"], a["surface"]
    if isinstance(a, tuple):
        return a
    return a.shape, a.size, a.surface


def featurize_roi(members, relation_facts, attributes) -> np.ndarray:
    """Feature vector for a set of at most 5 objects.

    ``members`` is a sequence of ids or anything with a ``members``
    attribute; ``attributes`` maps id -> (shape, size, surface), a dict
    with those keys, or an object carrying them.
    """
    members = getattr(members, "members", members)
    ids = sorted(members)
    if len(ids) > SLOTS:
        raise ValueError(f"at most {SLOTS} members per region, got {len(ids)}")
    x = np.zeros(N_FEATURES)
    slot = {o: i for i, o in enumerate(ids)}
    for o, i in slot.items():
        shape, size, surface = _attrs(attributes[o])
        base = i * ATTR_WIDTH
        x[base + SHAPES.index(shape)] = 1
        x[base + len(SHAPES) + SIZES.index(size)] = 1
        x[base + len(SHAPES) + len(SIZES) + SURFACES.index(surface)] = 1
        x[N_FEATURES - SLOTS + i] = 1
    rel_base = SLOTS * ATTR_WIDTH
    for f in relation_facts:
        p = parse_relation(f)
        if p is None or p[1] not in slot or p[2] not in slot or p[1] == p[2]:
            continue
        k = _PAIR_INDEX[(slot[p[1]], slot[p[2]])]
        x[rel_base + k * REL_WIDTH + _REL_INDEX[p[0]]] = 1
    return x


def make_example(members, relation_facts, attributes, occluded=None, stable=None, roi="") -> Example:
    """Training example; ``occluded`` maps member -> bool, ``stable`` is a bool or None."""
    members = getattr(members, "members", members)
    ids = sorted(members)
    y, m = np.zeros(N_OUTPUTS), np.zeros(N_OUTPUTS)
    for i, o in enumerate(ids):
        if occluded is not None and o in occluded:
            y[i], m[i] = float(occluded[o]), 1.0
    if stable is not None:
        y[STABILITY], m[STABILITY] = float(stable), 1.0
    return Example(featurize_roi(ids, relation_facts, attributes), y, m, roi)


# ---------------------------------------------------------------- model

@dataclass
class Model:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @classmethod
    def init(cls, seed: int = 0, n_in: int = N_FEATURES, hidden: int = HIDDEN, n_out: int = N_OUTPUTS):
        rng = np.random.default_rng(seed)
        return cls(rng.normal(0, 1 / np.sqrt(n_in), (hidden, n_in)), np.zeros(hidden),
                   rng.normal(0, 1 / np.sqrt(hidden), (n_out, hidden)), np.zeros(n_out))

    @classmethod
    def zeros(cls, n_in: int = N_FEATURES, hidden: int = HIDDEN, n_out: int = N_OUTPUTS):
        return cls(np.zeros((hidden, n_in)), np.zeros(hidden), np.zeros((n_out, hidden)), np.zeros(n_out))

    @property
    def params(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def copy(self) -> "Model":
        return Model(*(p.copy() for p in self.params))

    def dumps(self) -> str:
        lines = [MODEL_HEADER, f"layers {self.w1.shape[1]} {self.w1.shape[0]} {self.w2.shape[0]}"]
        for name, p in zip(("w1", "b1", "w2", "b2"), self.params):
            lines.append(f"{name} {' '.join(str(d) for d in p.shape)}")
            for row in np.atleast_2d(p):
                lines.append(" ".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Model":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != MODEL_HEADER:
            raise ValueError("not a model file (missing header)")
        pos = 2
        params = []
        for name in ("w1", "b1", "w2", "b2"):
            head = lines[pos].split()
            if head[0] != name:
                raise ValueError(f"expected {name} block, found {head[0]!r}")
            shape = tuple(int(s) for s in head[1:])
            rows = 1 if len(shape) == 1 else shape[0]
            data = [[float(v) for v in lines[pos + 1 + r].split()] for r in range(rows)]
            params.append(np.array(data).reshape(shape))
            pos += 1 + rows
        return cls(*params)


def _forward(model: Model, X: np.ndarray):
    h = np.tanh(X @ model.w1.T + model.b1)
    z = h @ model.w2.T + model.b2
    return h, z


def _sigmoid(z):
    return 0.5 * (1 + np.tanh(0.5 * z))


def loss(model: Model, X, Y, M) -> float:
    """Masked binary cross-entropy, summed over outputs and averaged over examples."""
    X, Y, M = np.atleast_2d(X), np.atleast_2d(Y), np.atleast_2d(M)
    _, z = _forward(model, X)
    per = np.logaddexp(0, z) - Y * z
    return float((per * M).sum() / len(X))


def gradients(model: Model, X, Y, M) -> list[np.ndarray]:
    X, Y, M = np.atleast_2d(X), np.atleast_2d(Y), np.atleast_2d(M)
    h, z = _forward(model, X)
    dz = (_sigmoid(z) - Y) * M / len(X)
    dw2 = dz.T @ h
    db2 = dz.sum(axis=0)
    dh = (dz @ model.w2) * (1 - h * h)
    dw1 = dh.T @ X
    db1 = dh.sum(axis=0)
    return [dw1, db1, dw2, db2]


def _stack(examples):
    return (np.array([e.x for e in examples]), np.array([e.y for e in examples]),
            np.array([e.mask for e in examples]))


def train(examples, config: TrainConfig | None = None, history: list | None = None) -> Model:
    """Gradient descent on masked cross-entropy; ``history`` collects the loss per epoch."""
    config = config or TrainConfig()
    examples = list(examples)
    if not examples:
        raise ValueError("cannot train on an empty example set")
    X, Y, M = _stack(examples)
    model = Model.init(config.seed, X.shape[1], config.hidden, Y.shape[1])
    rng = np.random.default_rng(config.seed + 1)
    n = len(X)
    bs = config.batch_size if 0 < config.batch_size < n else n
    for _ in range(config.epochs):
        order = rng.permutation(n) if bs < n else np.arange(n)
        for s in range(0, n, bs):
            idx = order[s:s + bs]
            for p, g in zip(model.params, gradients(model, X[idx], Y[idx], M[idx])):
                p -= config.learning_rate * g
        if history is not None:
            history.append(loss(model, X, Y, M))
    return model


def predict(model: Model, features):
    """Probabilities and hard labels; labels are -1 for absent slots."""
    x = np.asarray(features, dtype=float)
    if x.shape[-1] != model.w1.shape[1]:
        raise ValueError(f"feature length {x.shape[-1]} does not match model input {model.w1.shape[1]}")
    _, z = _forward(model, np.atleast_2d(x))
    probs = _sigmoid(z)
    labels = (probs >= 0.5).astype(int)
    presence = np.atleast_2d(x)[:, -SLOTS:]
    labels[:, :SLOTS][presence == 0] = -1
    if x.ndim == 1:
        return probs[0], labels[0]
    return probs, labels


def gradient_check(model: Model, example: Example, step: float = 1e-5) -> float:
    """Largest relative gap between analytic and central-difference gradients."""
    X, Y, M = example.x[None], example.y[None], example.mask[None]
    analytic = gradients(model, X, Y, M)
    worst = 0.0
    for p, g in zip(model.params, analytic):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for k in range(flat.size):
            old = flat[k]
            flat[k] = old + step
            up = loss(model, X, Y, M)
            flat[k] = old - step
            down = loss(model, X, Y, M)
            flat[k] = old
            num = (up - down) / (2 * step)
            # the floor keeps round-off on vanishing gradients from dominating
            rel = abs(num - gflat[k]) / max(abs(num) + abs(gflat[k]), 1e-6)
            worst = max(worst, rel)
    return worst


def accuracy(model: Model, examples) -> float:
    """Fraction of supervised outputs predicted correctly."""
    X, Y, M = _stack(list(examples))
    probs, _ = predict(model, X)
    hits = ((probs >= 0.5) == (Y >= 0.5)) * M
    return float(hits.sum() / max(M.sum(), 1))
