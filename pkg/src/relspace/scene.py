"""Synthetic tabletop scenes with analytic point clouds and rule-based oracles.

World frame: +x right, +y away from the camera (depth), +z up. Every
object is placed on the table (z = 0) or on top of another object.
All geometric reasoning uses the world-frame axis-aligned bounding box
of an object; yaw only rotates the sampled surface inside that box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

SHAPES = ("cube", "cylinder", "sphere", "duck", "apple", "pitcher", "mustard", "mug", "cracker")
SIZES = ("small", "medium", "large")
SURFACES = ("flat", "irregular")
COLORS = ("red", "green", "blue", "yellow", "white", "black", "orange", "purple")
ARRANGEMENTS = ("towers", "spread", "intersection")

POSITION_RELATIONS = ("in", "left", "right", "front", "behind", "above", "below")
DISTANCE_RELATIONS = ("touching", "not_touching", "far")

SIZE_SCALE = {"small": 0.03, "medium": 0.06, "large": 0.10}

# per-shape (x, y, z) multipliers of the size scale
SHAPE_ASPECT = {
    "cube": (1.0, 1.0, 1.0),
    "cylinder": (0.8, 0.8, 1.2),
    "sphere": (1.0, 1.0, 1.0),
    "duck": (1.0, 0.8, 0.9),
    "apple": (0.9, 0.9, 0.85),
    "pitcher": (0.9, 0.9, 1.4),
    "mustard": (0.6, 0.4, 1.5),
    "mug": (0.8, 0.8, 0.9),
    "cracker": (1.0, 0.35, 1.4),
}

SHAPE_SURFACE = {
    "cube": "flat",
    "cylinder": "flat",
    "sphere": "irregular",
    "duck": "irregular",
    "apple": "irregular",
    "pitcher": "irregular",
    "mustard": "flat",
    "mug": "flat",
    "cracker": "flat",
}

FOOTPRINT_INSET = 0.10
OCCLUSION_THRESHOLD = 0.05
TOUCHING_MAX = 0.01
FAR_MIN = 1.0
JITTER = 0.0005

# horizontal placement noise of a stacked object, as a fraction of its own half extent
STACK_OFFSET = 0.6
# probability that a stack is built with sizes increasing upwards
TOP_HEAVY = 0.5
# tie order used whenever two pyramids are equally good
PYRAMID_ORDER = ("above", "below", "left", "right", "front", "behind")


class Vec3(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class ObjectInstance:
    id: str
    shape: str
    size: str
    surface: str
    color: str
    position: Vec3
    yaw: float
    half_extents: Vec3

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.size not in SIZES:
            raise ValueError(f"unknown size {self.size!r}")
        if min(self.half_extents) <= 0:
            raise ValueError("half extents must be strictly positive")
        if self.shape == "duck" and self.surface != "irregular":
            raise ValueError("a duck always has an irregular surface")

    @property
    def box_half(self) -> np.ndarray:
        """Half extents of the world-frame axis-aligned bounding box."""
        hx, hy, hz = self.half_extents
        c, s = abs(math.cos(self.yaw)), abs(math.sin(self.yaw))
        return np.array([c * hx + s * hy, s * hx + c * hy, hz])

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        center = np.asarray(self.position, dtype=float)
        half = self.box_half
        return center - half, center + half

    @property
    def volume(self) -> float:
        hx, hy, hz = self.half_extents
        return 8.0 * hx * hy * hz


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    owner: str

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("point cloud must be nonempty")


@dataclass(frozen=True)
class Scene:
    objects: tuple[ObjectInstance, ...]
    arrangement: str
    seed: int
    # each structure lists object ids bottom to top
    structures: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        covered = sorted(i for s in self.structures for i in s)
        if covered != sorted(ids):
            raise ValueError("structures must partition the scene objects")

    def get(self, object_id: str) -> ObjectInstance:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(f"unknown object id {object_id!r}")

    @property
    def ids(self) -> list[str]:
        return [o.id for o in self.objects]

    def structure_ids(self) -> list[str]:
        return [f"s{i}" for i in range(len(self.structures))]

    def structure_of(self, object_id: str) -> str:
        for i, members in enumerate(self.structures):
            if object_id in members:
                return f"s{i}"
        raise KeyError(object_id)

    def supporter(self, object_id: str) -> str | None:
        for members in self.structures:
            if object_id in members:
                k = members.index(object_id)
                return members[k - 1] if k > 0 else None
        raise KeyError(object_id)


@dataclass
class GroundTruth:
    occluded: dict[str, bool]
    stable: dict[str, bool]
    object_stable: dict[str, bool]
    relations: dict[tuple[str, str], tuple[str, str]] = field(default_factory=dict)


def _rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([abs(int(k)) for k in keys] + [int(k < 0) for k in keys]))


def make_object(object_id, shape, size, color="white", position=(0.0, 0.0, 0.0), yaw=0.0, surface=None):
    """Build an object with the half extents implied by its shape and size."""
    scale = SIZE_SCALE[size]
    ax, ay, az = SHAPE_ASPECT[shape]
    return ObjectInstance(
        id=object_id,
        shape=shape,
        size=size,
        surface=surface or SHAPE_SURFACE[shape],
        color=color,
        position=Vec3(*map(float, position)),
        yaw=float(yaw),
        half_extents=Vec3(scale * ax, scale * ay, scale * az),
    )


def _random_object(rng, object_id, shape_weights=None):
    if shape_weights is None:
        shape = SHAPES[rng.integers(len(SHAPES))]
    else:
        p = np.asarray(shape_weights, dtype=float)
        shape = SHAPES[rng.choice(len(SHAPES), p=p / p.sum())]
    size = SIZES[rng.integers(len(SIZES))]
    color = COLORS[rng.integers(len(COLORS))]
    yaw = float(rng.uniform(-math.pi / 12, math.pi / 12))
    return make_object(object_id, shape, size, color, yaw=yaw)


# stacked objects are drawn with flat shapes twice as likely as irregular ones
_STACK_WEIGHTS = [1.0 if SHAPE_SURFACE[s] == "irregular" else 2.0 for s in SHAPES]


def _stack_objects(rng, ids):
    objs = [_random_object(rng, i, _STACK_WEIGHTS) for i in ids]
    if rng.uniform() < TOP_HEAVY:
        # smallest at the bottom, largest on top
        sizes = sorted((o.size for o in objs), key=SIZES.index)
        objs = [make_object(o.id, o.shape, sz, o.color, yaw=o.yaw) for o, sz in zip(objs, sizes)]
    return objs


def _place_on_table(obj, x, y):
    return replace(obj, position=Vec3(float(x), float(y), float(obj.box_half[2])))


def _stack(rng, objs, x, y):
    placed = [_place_on_table(objs[0], x, y)]
    for obj in objs[1:]:
        below = placed[-1]
        # keep the offset small enough that the object still reads as above its supporter
        reach = 0.9 * below.box_half[:2] * (1 + obj.box_half[2] / below.box_half[2])
        dx, dy = rng.uniform(-1, 1, size=2) * np.minimum(STACK_OFFSET * obj.box_half[:2], reach)
        top = below.position.z + below.box_half[2]
        placed.append(replace(obj, position=Vec3(float(below.position.x + dx), float(below.position.y + dy),
                                                  float(top + obj.box_half[2]))))
    return placed


def _boxes_overlap(a, b, margin=0.01):
    amin, amax = a.bbox()
    bmin, bmax = b.bbox()
    return bool(np.all(amin[:2] - margin < bmax[:2]) and np.all(bmin[:2] - margin < amax[:2]))


def _over(obj, ref) -> bool:
    d = np.asarray(obj.position) - np.asarray(ref.position)
    return PYRAMID_ORDER[int(pyramid_of(d, ref.box_half)[0])] == "above"


def _scatter(rng, objs, occupied, rows=3):
    """Place objects on the table in depth rows with randomized horizontal spacing.

    A placement is rejected when it overlaps an occupied spot or when an
    already placed object would read as above the new one.
    """
    placed = []
    for obj in objs:
        for _ in range(500):
            row = int(rng.integers(rows))
            x = rng.uniform(-0.45, 0.45)
            y = 0.55 + 0.3 * row + rng.uniform(-0.04, 0.04)
            cand = _place_on_table(obj, x, y)
            others = occupied + placed
            if not any(_boxes_overlap(cand, o) or _over(o, cand) for o in others):
                placed.append(cand)
                break
        else:
            raise RuntimeError("could not place object on a free spot")
    return placed


def generate_scene(arrangement: str, seed: int, object_count: int | None = None) -> Scene:
    """Generate a labeled synthetic scene, deterministic in its arguments.

    ``towers`` is one stack of ``object_count`` objects (2-5), ``spread``
    has exactly five objects on the table, and ``intersection`` has a
    stack of 2-4 objects plus 1-3 objects on the table (3-5 in total).
    ``object_count=None`` draws a count valid for the arrangement.
    """
    if arrangement not in ARRANGEMENTS:
        raise ValueError(f"invalid arrangement {arrangement!r}")
    rng = _rng(seed, ARRANGEMENTS.index(arrangement), -1 if object_count is None else object_count)
    if object_count is None:
        object_count = {"towers": int(rng.integers(2, 6)), "spread": 5,
                        "intersection": int(rng.integers(3, 6))}[arrangement]
    if not 2 <= object_count <= 5:
        raise ValueError("object_count must be in [2, 5]")
    if arrangement == "spread" and object_count != 5:
        raise ValueError("spread scenes have exactly 5 objects")
    if arrangement == "intersection" and object_count < 3:
        raise ValueError("intersection scenes need at least 3 objects")

    ids = [f"o{i + 1}" for i in range(object_count)]
    if arrangement == "towers":
        objs = _stack_objects(rng, ids)
        placed = _stack(rng, objs, rng.uniform(-0.2, 0.2), rng.uniform(0.6, 1.0))
        structures = (tuple(ids),)
    elif arrangement == "spread":
        objs = [_random_object(rng, i) for i in ids]
        placed = _scatter(rng, objs, [])
        structures = tuple((i,) for i in ids)
    else:
        low = max(2, object_count - 3)
        height = int(rng.integers(low, min(4, object_count - 1) + 1))
        for attempt in range(20):
            stack_objs = _stack_objects(rng, ids[:height])
            stack = _stack(rng, stack_objs, rng.uniform(-0.3, 0.3), 0.85 + rng.uniform(-0.05, 0.05))
            try:
                rest = _scatter(rng, [_random_object(rng, i) for i in ids[height:]], stack, rows=3)
                break
            except RuntimeError:
                # a tall stack can overhang the whole table; draw a new one
                if attempt == 19:
                    raise
        placed = stack + rest
        structures = (tuple(ids[:height]),) + tuple((i,) for i in ids[height:])
    return Scene(objects=tuple(placed), arrangement=arrangement, seed=int(seed), structures=structures)


# ---------------------------------------------------------------- sampling

def _sample_box(rng, half, n):
    hx, hy, hz = half
    areas = np.array([hy * hz, hy * hz, hx * hz, hx * hz, hx * hy, hx * hy])
    face = rng.choice(6, size=n, p=areas / areas.sum())
    pts = rng.uniform(-1.0, 1.0, size=(n, 3)) * np.array(half)
    axis = face // 2
    sign = np.where(face % 2 == 0, -1.0, 1.0)
    pts[np.arange(n), axis] = sign * np.asarray(half)[axis]
    return pts


def _sample_cylinder(rng, half, n):
    rx, ry, hz = half
    side = 2 * math.pi * math.sqrt((rx * rx + ry * ry) / 2) * 2 * hz
    caps = 2 * math.pi * rx * ry
    on_side = rng.uniform(size=n) < side / (side + caps)
    t = rng.uniform(0, 2 * math.pi, size=n)
    r = np.where(on_side, 1.0, np.sqrt(rng.uniform(size=n)))
    z = np.where(on_side, rng.uniform(-hz, hz, size=n), np.where(rng.uniform(size=n) < 0.5, -hz, hz))
    return np.column_stack([rx * r * np.cos(t), ry * r * np.sin(t), z])


def _sample_ellipsoid(rng, half, n):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * np.asarray(half)


def _composite(shape, half):
    """Primitive decomposition (kind, center, half extents) in the object frame."""
    hx, hy, hz = half
    if shape == "duck":
        return [("ellipsoid", (-0.2 * hx, 0, -0.35 * hz), (0.8 * hx, hy, 0.65 * hz)),
                ("ellipsoid", (0.45 * hx, 0, 0.55 * hz), (0.35 * hx, 0.4 * hy, 0.45 * hz)),
                ("box", (0.9 * hx, 0, 0.5 * hz), (0.1 * hx, 0.15 * hy, 0.08 * hz))]
    if shape == "pitcher":
        return [("cylinder", (-0.15 * hx, 0, 0), (0.85 * hx, hy, hz)),
                ("box", (0.85 * hx, 0, 0.2 * hz), (0.15 * hx, 0.1 * hy, 0.5 * hz))]
    if shape == "mug":
        return [("cylinder", (-0.2 * hx, 0, 0), (0.8 * hx, hy, hz)),
                ("box", (0.8 * hx, 0, 0), (0.2 * hx, 0.1 * hy, 0.5 * hz))]
    if shape == "mustard":
        return [("cylinder", (0, 0, -0.15 * hz), (hx, hy, 0.85 * hz)),
                ("cylinder", (0, 0, 0.85 * hz), (0.3 * hx, 0.3 * hy, 0.15 * hz))]
    raise ValueError(f"unknown shape {shape!r}")


_PRIMITIVE = {"box": _sample_box, "cylinder": _sample_cylinder, "ellipsoid": _sample_ellipsoid}


def _primitive_area(kind, half):
    a, b, c = half
    if kind == "box":
        return 8 * (a * b + b * c + a * c)
    if kind == "cylinder":
        return 2 * math.pi * math.sqrt((a * a + b * b) / 2) * 2 * c + 2 * math.pi * a * b
    p = 1.6075
    return 4 * math.pi * (((a * b) ** p + (a * c) ** p + (b * c) ** p) / 3) ** (1 / p)


def sample_local(shape, half, n, rng):
    """Surface samples of a shape in its own (unrotated) frame."""
    if shape in ("cube", "cracker"):
        return _sample_box(rng, half, n)
    if shape == "cylinder":
        return _sample_cylinder(rng, half, n)
    if shape in ("sphere", "apple"):
        return _sample_ellipsoid(rng, half, n)
    parts = _composite(shape, half)
    areas = np.array([_primitive_area(k, h) for k, _, h in parts])
    which = rng.choice(len(parts), size=n, p=areas / areas.sum())
    out = np.empty((n, 3))
    for j, (kind, center, h) in enumerate(parts):
        sel = which == j
        out[sel] = _PRIMITIVE[kind](rng, h, int(sel.sum())) + np.asarray(center)
    return out


def sample_point_cloud(obj: ObjectInstance, points_per_object: int = 500, seed: int = 0) -> PointCloud:
    """Sample ``points_per_object`` points uniformly on the object surface."""
    if points_per_object < 50:
        raise ValueError("points_per_object must be >= 50")
    if obj.shape not in SHAPES:
        raise ValueError(f"unknown shape {obj.shape!r}")
    rng = _rng(seed, *(ord(c) for c in obj.id), points_per_object)
    local = sample_local(obj.shape, tuple(obj.half_extents), points_per_object, rng)
    c, s = math.cos(obj.yaw), math.sin(obj.yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    pts = local @ rot.T + np.asarray(obj.position)
    pts += rng.uniform(-JITTER, JITTER, size=pts.shape)
    return PointCloud(points=pts, owner=obj.id)


def sample_scene_clouds(scene: Scene, points_per_object: int = 500) -> dict[str, PointCloud]:
    return {o.id: sample_point_cloud(o, points_per_object, scene.seed) for o in scene.objects}


# ---------------------------------------------------------------- oracles

def _footprint(obj):
    lo, hi = obj.bbox()
    w = hi[:2] - lo[:2]
    return lo[:2] + FOOTPRINT_INSET * w, hi[:2] - FOOTPRINT_INSET * w


def _locally_unstable(scene, members, k):
    """Whether the k-th object of a stack cannot rest on its supporter."""
    supporter = scene.get(members[k - 1])
    if supporter.surface == "irregular":
        return True
    load = [scene.get(i) for i in members[k:]]
    mass = np.array([o.volume for o in load])
    com = (np.array([o.position[:2] for o in load]) * mass[:, None]).sum(axis=0) / mass.sum()
    lo, hi = _footprint(supporter)
    return not bool(np.all(com >= lo) and np.all(com <= hi))


def object_stability(scene: Scene) -> dict[str, bool]:
    """An object is stable unless it, or something beneath it, is locally unstable."""
    out = {}
    for members in scene.structures:
        falling = False
        for k, oid in enumerate(members):
            if k > 0 and _locally_unstable(scene, members, k):
                falling = True
            out[oid] = not falling
    return out


def stability_oracle(scene: Scene) -> dict[str, bool]:
    per_object = object_stability(scene)
    return {sid: all(per_object[i] for i in members)
            for sid, members in zip(scene.structure_ids(), scene.structures)}


def _frontal_rect(obj):
    lo, hi = obj.bbox()
    return lo[0], hi[0], lo[2], hi[2]


def occlusion_oracle(scene: Scene) -> dict[str, bool]:
    out = {}
    for a in scene.objects:
        ax0, ax1, az0, az1 = _frontal_rect(a)
        area = (ax1 - ax0) * (az1 - az0)
        hidden = False
        for b in scene.objects:
            if b.id == a.id or not b.position.y < a.position.y:
                continue
            bx0, bx1, bz0, bz1 = _frontal_rect(b)
            w = min(ax1, bx1) - max(ax0, bx0)
            h = min(az1, bz1) - max(az0, bz0)
            if w > 0 and h > 0 and w * h > OCCLUSION_THRESHOLD * area:
                hidden = True
                break
        out[a.id] = hidden
    return out


def pyramid_of(offsets: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Index into PYRAMID_ORDER of the pyramid containing each offset vector.

    The pyramids have their apex at the box center and their faces through
    the box edges, so a point belongs to the axis maximizing |d_i| / h_i.
    """
    u = np.abs(np.atleast_2d(offsets)) / half
    d = np.atleast_2d(offsets)
    # scores in PYRAMID_ORDER: above, below, left, right, front, behind
    scores = np.column_stack([
        np.where(d[:, 2] > 0, u[:, 2], -1.0),
        np.where(d[:, 2] <= 0, u[:, 2], -1.0),
        np.where(d[:, 0] < 0, u[:, 0], -1.0),
        np.where(d[:, 0] >= 0, u[:, 0], -1.0),
        np.where(d[:, 1] < 0, u[:, 1], -1.0),
        np.where(d[:, 1] >= 0, u[:, 1], -1.0),
    ])
    return np.argmax(scores, axis=1)


def _box_gap(a, b):
    amin, amax = a.bbox()
    bmin, bmax = b.bbox()
    gap = np.maximum(0.0, np.maximum(bmin - amax, amin - bmax))
    return float(np.linalg.norm(gap))


def _inside_fraction(target, ref):
    tmin, tmax = target.bbox()
    rmin, rmax = ref.bbox()
    inter = np.clip(np.minimum(tmax, rmax) - np.maximum(tmin, rmin), 0.0, None)
    return float(np.prod(inter) / np.prod(tmax - tmin))


def distance_label(stat: float) -> str:
    if stat <= TOUCHING_MAX:
        return "touching"
    if stat >= FAR_MIN:
        return "far"
    return "not_touching"


def relation_oracle(scene: Scene, pair: tuple[str, str], noise: float = 0.0,
                    rng: np.random.Generator | None = None) -> tuple[str, str]:
    """Exact (position, distance) relation of ``pair[0]`` with respect to ``pair[1]``.

    With ``noise > 0`` each label is independently replaced by a uniformly
    chosen wrong label with that probability.
    """
    target, ref = scene.get(pair[0]), scene.get(pair[1])
    if _inside_fraction(target, ref) > 0.5:
        pos = "in"
    else:
        d = np.asarray(target.position) - np.asarray(ref.position)
        pos = PYRAMID_ORDER[int(pyramid_of(d, ref.box_half)[0])]
    dist = distance_label(_box_gap(target, ref))
    if noise > 0:
        rng = rng if rng is not None else np.random.default_rng()
        if rng.uniform() < noise:
            pos = str(rng.choice([r for r in POSITION_RELATIONS if r != pos]))
        if rng.uniform() < noise:
            dist = str(rng.choice([r for r in DISTANCE_RELATIONS if r != dist]))
    return pos, dist


def ground_truth(scene: Scene, noise: float = 0.0, seed: int = 0) -> GroundTruth:
    rng = np.random.default_rng(seed) if noise > 0 else None
    relations = {(a, b): relation_oracle(scene, (a, b), noise, rng)
                 for a in scene.ids for b in scene.ids if a != b}
    return GroundTruth(occluded=occlusion_oracle(scene), stable=stability_oracle(scene),
                       object_stable=object_stability(scene), relations=relations)


def settle(scene: Scene) -> Scene:
    """Let unstable objects fall to the table; a stable scene is returned unchanged."""
    per_object = object_stability(scene)
    if all(per_object.values()):
        return scene
    moved = {o.id: o for o in scene.objects}
    structures = []
    for members in scene.structures:
        kept = [i for i in members if per_object[i]]
        fallen = [i for i in members if not per_object[i]]
        if kept:
            structures.append(tuple(kept))
        base = scene.get(members[0])
        for j, oid in enumerate(fallen):
            o = moved[oid]
            x = base.position.x + (j + 1) * 0.25
            moved[oid] = _place_on_table(o, x, base.position.y)
            structures.append((oid,))
    return Scene(objects=tuple(moved[o.id] for o in scene.objects), arrangement=scene.arrangement,
                 seed=scene.seed, structures=tuple(structures))


# ---------------------------------------------------------------- pairs for grounding experiments

_DIRECTIONS = {
    "above": (0, 0, 1), "below": (0, 0, -1), "left": (-1, 0, 0), "right": (1, 0, 0),
    "front": (0, -1, 0), "behind": (0, 1, 0),
}


def generate_pair(relation: str, seed: int) -> Scene:
    """A two-object scene (target ``t``, reference ``r``) placed roughly in ``relation``.

    The placement is perturbed so some pairs land near pyramid borders;
    callers should label pairs with ``relation_oracle``, not ``relation``.
    """
    if relation not in POSITION_RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    rng = _rng(seed, POSITION_RELATIONS.index(relation), 77)
    if relation == "in":
        ref = make_object("r", SHAPES[rng.choice([0, 5, 7, 8])], "large", yaw=0.0)
        tgt = make_object("t", SHAPES[rng.choice([0, 2, 4])], "small", yaw=0.0)
        ref = replace(ref, position=Vec3(0.0, 0.8, float(ref.half_extents.z)))
        jitter = rng.uniform(-0.5, 0.5, size=3) * (ref.box_half - tgt.box_half)
        tgt = replace(tgt, position=Vec3(*(np.asarray(ref.position) + jitter)))
        return Scene((tgt, ref), "pair", int(seed), (("r", "t"),))
    ref = _random_object(rng, "r")
    tgt = _random_object(rng, "t")
    ref = replace(ref, position=Vec3(0.0, 0.8, float(ref.box_half[2])))
    direction = np.asarray(_DIRECTIONS[relation], dtype=float)
    direction = direction + rng.normal(scale=0.35, size=3)
    direction /= np.linalg.norm(direction)
    # push the target out until boxes no longer intersect, then add a random gap
    reach = float(np.abs(direction) @ (ref.box_half + tgt.box_half))
    gap = float(rng.choice([0.0, rng.uniform(0.0, 0.01), rng.uniform(0.02, 0.6), rng.uniform(1.0, 1.6)],
                           p=[0.2, 0.15, 0.45, 0.2]))
    center = np.asarray(ref.position) + direction * (reach + gap / max(np.abs(direction).max(), 1e-9))
    tgt = replace(tgt, position=Vec3(*center))
    return Scene((tgt, ref), "pair", int(seed), (("r",), ("t",)))
