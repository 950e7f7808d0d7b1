"""A ground-truth pick-and-place simulator for judging plans."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..scene import SIZES

ROBOT = "rob1"
TABLE = "table"


@dataclass(frozen=True)
class State:
    on: tuple  # sorted ((object, location), ...) for objects not in hand
    hand: str | None = None

    def where(self, obj):
        return dict(self.on).get(obj)


class World:
    """Objects rest on the table or on one another; the robot holds at most one.

    A configuration is physically unstable when some object sits (directly
    or higher up) on an irregular object, or is large and sits above a
    small one. Executions that pass through such a configuration fail.
    """

    def __init__(self, objects: dict):
        self.objects = dict(objects)  # id -> (size, surface)

    def state(self, placement: dict, hand=None) -> State:
        return State(tuple(sorted(placement.items())), hand)

    def below(self, s: State, obj) -> list:
        on, out = dict(s.on), []
        cur = on.get(obj)
        while cur is not None and cur != TABLE:
            out.append(cur)
            cur = on.get(cur)
        return out

    def stable(self, s: State) -> bool:
        for o in dict(s.on):
            for b in self.below(s, o):
                if self.objects[b][1] == "irregular":
                    return False
                if self.objects[o][0] == "large" and self.objects[b][0] == "small":
                    return False
        return True

    def actions(self, s: State) -> list[str]:
        on = dict(s.on)
        occupied = set(on.values())
        if s.hand is None:
            return [f"pickup({ROBOT},{o})" for o in sorted(on) if o not in occupied]
        locs = [TABLE] + [o for o in sorted(on) if o not in occupied]
        return [f"putdown({ROBOT},{s.hand},{loc})" for loc in locs]

    def apply(self, s: State, action: str) -> State | None:
        """Successor state, or None when the action is not executable."""
        if action not in self.actions(s):
            return None
        name, args = action.split("(", 1)
        args = [a.strip() for a in args.rstrip(")").split(",")]
        on = dict(s.on)
        if name == "pickup":
            del on[args[1]]
            return self.state(on, args[1])
        on[args[1]] = args[2]
        return self.state(on, None)

    @staticmethod
    def holds(s: State, goal) -> bool:
        on = dict(s.on)
        for lit in goal:
            name, args = lit.replace(" ", "").split("(", 1)
            a, b = args.rstrip(")").split(",")
            if name != "on":
                raise ValueError(f"unsupported goal literal {lit!r}")
            if on.get(a) != b:
                return False
        return True

    def shortest(self, start: State, goal, max_len: int) -> int | None:
        """Length of the shortest execution that reaches the goal through stable states only."""
        if not self.stable(start):
            return None
        seen, frontier = {start}, deque([(start, 0)])
        while frontier:
            s, d = frontier.popleft()
            if self.holds(s, goal):
                return d
            if d == max_len:
                continue
            for a in self.actions(s):
                t = self.apply(s, a)
                if t is not None and t not in seen and self.stable(t):
                    seen.add(t)
                    frontier.append((t, d + 1))
        return None

    def execute(self, start: State, actions) -> tuple[bool, State]:
        """Run a plan; it succeeds when every step is executable and every state stable."""
        s = start
        for a in actions:
            t = self.apply(s, a.replace(" ", ""))
            if t is None or not self.stable(t):
                return False, s
            s = t
        return True, s


def classify(world: World, start: State, actions, goal, minimum: int) -> str:
    ok, end = world.execute(start, actions)
    if not ok or not world.holds(end, goal):
        return "incorrect"
    return "optimal" if len(actions) == minimum else "sub_optimal"


def random_world(rng: np.random.Generator, n_objects: int) -> World:
    """Objects with random sizes; exactly one has an irregular surface."""
    irregular = int(rng.integers(n_objects))
    objs = {}
    for i in range(n_objects):
        size = SIZES[int(rng.integers(len(SIZES)))]
        objs[f"o{i + 1}"] = (size, "irregular" if i == irregular else "flat")
    return World(objs)


def random_state(rng: np.random.Generator, world: World) -> State:
    """A stable configuration built by dropping objects in random order onto random free spots."""
    for _ in range(100):
        on: dict = {}
        for o in rng.permutation(sorted(world.objects)):
            free = [TABLE] + [x for x in sorted(on) if x not in on.values()]
            on[str(o)] = free[int(rng.integers(len(free)))]
        s = world.state(on)
        if world.stable(s):
            return s
    return world.state({o: TABLE for o in world.objects})
