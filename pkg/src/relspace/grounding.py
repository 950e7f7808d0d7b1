"""Grounding of spatial prepositions between point clouds.

Two groundings are provided: a fixed geometric one (bounding-box
pyramids plus distance thresholds) and a learned one built from
normalized histograms ("visual words"). A small controller tracks how
often each agrees with feedback and picks the one to trust.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scene import DISTANCE_RELATIONS, FAR_MIN, PYRAMID_ORDER, TOUCHING_MAX, PointCloud, pyramid_of

# ties are broken by position in these tuples
POSITION_ORDER = ("in",) + PYRAMID_ORDER
DISTANCE_ORDER = DISTANCE_RELATIONS

THETA_BINS = 18
PHI_BINS = 36
DIST_BIN = 0.01
DIST_MAX = 2.0
DIST_BINS = int(round(DIST_MAX / DIST_BIN)) + 1  # last bin collects overflow
SUBSAMPLE_CAP = 500
CLOSEST_FRACTION = 0.10


def _points(cloud) -> np.ndarray:
    pts = cloud.points if isinstance(cloud, PointCloud) else cloud
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("empty point cloud")
    return pts


@dataclass(frozen=True)
class BoundingBox:
    min: np.ndarray
    max: np.ndarray

    @classmethod
    def of(cls, cloud) -> "BoundingBox":
        pts = _points(cloud)
        return cls(pts.min(axis=0), pts.max(axis=0))

    @property
    def center(self) -> np.ndarray:
        return (self.min + self.max) / 2

    @property
    def half(self) -> np.ndarray:
        # degenerate boxes get a tiny thickness so pyramid ratios stay finite
        return np.maximum((self.max - self.min) / 2, 1e-9)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return np.all((pts >= self.min) & (pts <= self.max), axis=1)


# ---------------------------------------------------------------- QSR

def qsr_position(ref_cloud, target_cloud) -> str:
    """Position of the target relative to the reference."""
    ref = BoundingBox.of(ref_cloud)
    pts = _points(target_cloud)
    if ref.contains(pts).mean() > 0.5:
        return "in"
    votes = np.bincount(pyramid_of(pts - ref.center, ref.half), minlength=len(PYRAMID_ORDER))
    return PYRAMID_ORDER[int(np.argmax(votes))]


def _stride(pts: np.ndarray, cap: int = SUBSAMPLE_CAP) -> np.ndarray:
    if len(pts) <= cap:
        return pts
    return pts[:: int(math.ceil(len(pts) / cap))]


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def closest_distances(cloud_a, cloud_b, fraction: float = CLOSEST_FRACTION) -> np.ndarray:
    """The closest-distance sample that the distance grounding summarizes.

    For each cloud, every point's distance to the nearest point of the
    other cloud is computed and the smallest ``ceil(fraction * size)`` are
    kept. The direction with the smaller mean wins, so a small object
    resting on a large one is judged from its own contact face.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    a, b = _stride(_points(cloud_a)), _stride(_points(cloud_b))
    d = pairwise_distances(a, b)
    best = None
    for nearest in (d.min(axis=1), d.min(axis=0)):
        k = int(math.ceil(fraction * nearest.size))
        chosen = np.sort(nearest)[:k]
        if best is None or chosen.mean() < best.mean():
            best = chosen
    return best


def closest_distance_stat(cloud_a, cloud_b, fraction: float = CLOSEST_FRACTION) -> float:
    return float(closest_distances(cloud_a, cloud_b, fraction).mean())


def distance_from_stat(stat: float) -> str:
    if stat <= TOUCHING_MAX:
        return "touching"
    if stat >= FAR_MIN:
        return "far"
    return "not_touching"


def qsr_distance(cloud_a, cloud_b) -> str:
    return distance_from_stat(closest_distance_stat(cloud_a, cloud_b))


# ---------------------------------------------------------------- histograms

def normalize(h: np.ndarray) -> np.ndarray:
    total = h.sum()
    if total <= 0:
        raise ValueError("cannot normalize an empty histogram")
    return h / total


def build_position_histogram(ref_cloud, target_cloud) -> np.ndarray:
    """18x36 histogram of (polar, azimuth) angles of target points seen from the reference centroid."""
    center = _points(ref_cloud).mean(axis=0)
    v = _points(target_cloud) - center
    r = np.linalg.norm(v, axis=1)
    cos_t = np.divide(v[:, 2], r, out=np.ones_like(r), where=r > 0)
    theta = np.degrees(np.arccos(np.clip(cos_t, -1.0, 1.0)))
    phi = np.degrees(np.arctan2(v[:, 1], v[:, 0]))
    ti = np.minimum((theta / 10.0).astype(int), THETA_BINS - 1)
    pj = np.minimum(((phi + 180.0) / 10.0).astype(int), PHI_BINS - 1)
    h = np.zeros((THETA_BINS, PHI_BINS))
    np.add.at(h, (ti, pj), 1.0)
    return normalize(h)


def build_distance_histogram(cloud_a, cloud_b) -> np.ndarray:
    """1D histogram (1 cm bins over [0, 2] m plus overflow) of the closest-distance sample."""
    d = closest_distances(cloud_a, cloud_b)
    idx = np.minimum((d / DIST_BIN).astype(int), DIST_BINS - 1)
    return normalize(np.bincount(idx, minlength=DIST_BINS).astype(float))


def _same_layout(h, g):
    h, g = np.asarray(h, dtype=float), np.asarray(g, dtype=float)
    if h.shape != g.shape:
        raise ValueError(f"histogram layouts differ: {h.shape} vs {g.shape}")
    return h, g


def chi_squared(h, g) -> float:
    h, g = _same_layout(h, g)
    s = h + g
    num = (h - g) ** 2
    return float(np.sum(np.divide(num, 2 * s, out=np.zeros_like(s), where=s > 0)))


def histogram_intersection(h, g) -> float:
    h, g = _same_layout(h, g)
    return float(np.minimum(h, g).sum())


# ---------------------------------------------------------------- visual words

@dataclass
class VisualWordStore:
    position_words: dict[str, np.ndarray] = field(default_factory=dict)
    distance_words: dict[str, np.ndarray] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def copy(self) -> "VisualWordStore":
        return VisualWordStore({k: v.copy() for k, v in self.position_words.items()},
                               {k: v.copy() for k, v in self.distance_words.items()},
                               dict(self.counts))

    def dumps(self) -> str:
        lines = ["relspace_msr 1"]
        for family, words in (("position", self.position_words), ("distance", self.distance_words)):
            for rel in (POSITION_ORDER if family == "position" else DISTANCE_ORDER):
                if rel in words:
                    h = words[rel]
                    shape = "x".join(str(s) for s in h.shape)
                    lines.append(f"word {family} {rel} {self.counts[rel]} {shape}")
                    lines.append(" ".join(repr(float(x)) for x in h.ravel()))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "VisualWordStore":
        lines = text.splitlines()
        if not lines or lines[0].split()[:1] != ["relspace_msr"]:
            raise ValueError("missing relspace_msr header")
        store = cls()
        it = iter(lines[1:])
        for head in it:
            if not head.strip():
                continue
            _, family, rel, count, shape = head.split()
            dims = tuple(int(s) for s in shape.split("x"))
            h = np.array([float(x) for x in next(it).split()]).reshape(dims)
            (store.position_words if family == "position" else store.distance_words)[rel] = h
            store.counts[rel] = int(count)
        return store


def msr_update(store: VisualWordStore, relation: str, new_histogram) -> VisualWordStore:
    """Running-mean merge of a new observation into the word for ``relation`` (in place)."""
    new = np.asarray(new_histogram, dtype=float)
    words = store.position_words if relation in POSITION_ORDER else store.distance_words
    n = store.counts.get(relation, 0)
    if n == 0 or relation not in words:
        words[relation] = new.copy()
    else:
        words[relation] = normalize((n * words[relation] + new) / (n + 1))
    store.counts[relation] = n + 1
    return store


def _argbest(scores: dict[str, float], order, lower_is_better: bool) -> str:
    sign = 1.0 if lower_is_better else -1.0
    return min(scores, key=lambda r: (sign * scores[r], order.index(r)))


def msr_position(store: VisualWordStore, ref_cloud, target_cloud) -> str:
    if not store.position_words:
        raise ValueError("store has no position words")
    h = build_position_histogram(ref_cloud, target_cloud)
    return _argbest({r: chi_squared(h, w) for r, w in store.position_words.items()}, POSITION_ORDER, True)


def msr_distance(store: VisualWordStore, ref_cloud, target_cloud) -> str:
    if not store.distance_words:
        raise ValueError("store has no distance words")
    h = build_distance_histogram(ref_cloud, target_cloud)
    return _argbest({r: histogram_intersection(h, w) for r, w in store.distance_words.items()},
                    DISTANCE_ORDER, False)


def msr_classify(store: VisualWordStore, ref_cloud, target_cloud) -> tuple[str, str]:
    return msr_position(store, ref_cloud, target_cloud), msr_distance(store, ref_cloud, target_cloud)


def qsr_classify(ref_cloud, target_cloud) -> tuple[str, str]:
    return qsr_position(ref_cloud, target_cloud), qsr_distance(target_cloud, ref_cloud)


# ---------------------------------------------------------------- controller

@dataclass
class GroundingConfidence:
    qsr_agreements: int = 0
    msr_agreements: int = 0
    feedback_count: int = 0

    @property
    def active(self) -> str:
        if self.feedback_count == 0 or self.msr_agreements <= self.qsr_agreements:
            return "QSR"
        return "MSR"


def controller_step(conf: GroundingConfidence, qsr_label, msr_label, feedback_label) -> GroundingConfidence:
    if feedback_label is None:
        raise ValueError("controller_step needs a feedback label")
    return GroundingConfidence(
        qsr_agreements=conf.qsr_agreements + int(qsr_label == feedback_label),
        msr_agreements=conf.msr_agreements + int(msr_label == feedback_label),
        feedback_count=conf.feedback_count + 1,
    )


@dataclass
class Controller:
    """Agreement counters for one relation family."""

    confidence: GroundingConfidence = field(default_factory=GroundingConfidence)

    def observe(self, qsr_label, msr_label, feedback_label) -> None:
        self.confidence = controller_step(self.confidence, qsr_label, msr_label, feedback_label)

    @property
    def active(self) -> str:
        return self.confidence.active

    def choose(self, qsr_label, msr_label):
        return msr_label if self.active == "MSR" else qsr_label


@dataclass
class Grounder:
    """Bundles the word store and per-family controllers."""

    store: VisualWordStore = field(default_factory=VisualWordStore)
    position_ctl: Controller = field(default_factory=Controller)
    distance_ctl: Controller = field(default_factory=Controller)

    def feedback(self, ref_cloud, target_cloud, position: str, distance: str, learn: bool = True) -> None:
        """Score both groundings on a labeled pair, then fold the pair into the words."""
        qp, qd = qsr_classify(ref_cloud, target_cloud)
        if self.store.position_words:
            self.position_ctl.observe(qp, msr_position(self.store, ref_cloud, target_cloud), position)
        if self.store.distance_words:
            self.distance_ctl.observe(qd, msr_distance(self.store, ref_cloud, target_cloud), distance)
        if learn:
            msr_update(self.store, position, build_position_histogram(ref_cloud, target_cloud))
            msr_update(self.store, distance, build_distance_histogram(target_cloud, ref_cloud))

    def classify(self, ref_cloud, target_cloud, mode: str = "combined") -> tuple[str, str]:
        qp, qd = qsr_classify(ref_cloud, target_cloud)
        if mode == "qsr" or not (self.store.position_words and self.store.distance_words):
            return qp, qd
        mp, md = msr_classify(self.store, ref_cloud, target_cloud)
        if mode == "msr":
            return mp, md
        return self.position_ctl.choose(qp, mp), self.distance_ctl.choose(qd, md)


def extract_relations(scene, clouds: dict, grounder: Grounder | None = None, mode: str = "qsr") -> list[str]:
    """One position and one distance fact for every ordered object pair.

    ``obj_relation(R, A, B)`` states that A stands in relation R to B.
    """
    grounder = grounder or Grounder()
    facts = []
    for a in scene.ids:
        for b in scene.ids:
            if a == b:
                continue
            pos, dist = grounder.classify(clouds[b], clouds[a], mode)
            facts.append(f"obj_relation({pos},{a},{b})")
            facts.append(f"obj_relation({dist},{a},{b})")
    return facts
