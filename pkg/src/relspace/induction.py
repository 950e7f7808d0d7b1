"""Learning state constraints from labelled relational examples.

Examples describe one target object through binary attributes; a
decision tree is grown over them and every sufficiently pure,
sufficiently supported branch becomes a candidate axiom. Candidates
are validated across an ensemble of random splits, merged with the
axioms already known, and forgotten again unless reinforced.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .attention import parse_relation
from .logic.parser import parse_rule
from .logic.terms import Atom, Lit
from .scene import DISTANCE_RELATIONS, POSITION_RELATIONS, SIZES

RELATIONS = POSITION_RELATIONS + DISTANCE_RELATIONS
TALL = 4
LABELS = {
    "stability": ("stable", "unstable"),
    "occlusion": ("occluded", "not_occluded"),
}
HEAD = {"stable": "stable(A)", "unstable": "-stable(A)", "occluded": "occluded(A)",
        "not_occluded": "-occluded(A)"}
STORE_HEADER = "relspace_axioms 1"


# ---------------------------------------------------------------- vocabulary

@dataclass(frozen=True)
class Attribute:
    name: str
    positive: tuple  # body literals; "B" marks the partner variable
    negative: tuple
    implies: tuple = ()


def _vocabulary():
    out = [Attribute(f"rel_{r}", (f"obj_relation({r}, A, B)",), (f"not obj_relation({r}, A, B)",))
           for r in RELATIONS]
    out.append(Attribute("irregular_below", ("obj_relation(above, A, B)", "obj_surface(B, irregular)"),
                         ("not irregular_below(A)",), ("rel_above",)))
    out.append(Attribute("small_base",
                         ("obj_relation(above, A, B)", "obj_size(A, large)", "obj_size(B, small)"),
                         ("not small_base(A)",), ("rel_above", "size_large")))
    out.append(Attribute("surface_irregular", ("obj_surface(A, irregular)",), ("not obj_surface(A, irregular)",)))
    out += [Attribute(f"size_{s}", (f"obj_size(A, {s})",), (f"not obj_size(A, {s})",)) for s in SIZES]
    out.append(Attribute("tall_tower", ("tower_height(A, N)", f"N > {TALL}"), ("not tall_tower(A)",)))
    return {a.name: a for a in out}


VOCABULARY = _vocabulary()


@dataclass(frozen=True)
class RelationalExample:
    attributes: dict
    label: str
    roi: str = ""
    target: str = ""


def describe(target: str, members, relation_facts, attributes) -> dict:
    """Binary attribute map of ``target`` within a region.

    ``attributes`` maps id -> (shape, size, surface) or an object with
    those fields.
    """
    members = set(getattr(members, "members", members))

    def attr(o):
        a = attributes[o]
        return (a.size, a.surface) if hasattr(a, "size") else (a[1], a[2])

    partners: dict[str, set] = {r: set() for r in RELATIONS}
    for f in relation_facts:
        p = parse_relation(f)
        if p and p[1] == target and p[2] in members and p[2] != target:
            partners[p[0]].add(p[2])
    size, surface = attr(target)
    below = partners["above"]
    out = {f"rel_{r}": bool(partners[r]) for r in RELATIONS}
    out["irregular_below"] = any(attr(b)[1] == "irregular" for b in below)
    out["small_base"] = size == "large" and any(attr(b)[0] == "small" for b in below)
    out["surface_irregular"] = surface == "irregular"
    for s in SIZES:
        out[f"size_{s}"] = size == s
    out["tall_tower"] = 1 + len(below) > TALL
    return out


# ---------------------------------------------------------------- trees

def entropy(counts) -> float:
    counts = [c for c in (counts.values() if isinstance(counts, dict) else counts)]
    total = sum(counts)
    if total <= 0:
        raise ValueError("entropy of an empty distribution")
    return -sum(c / total * math.log2(c / total) for c in counts if c > 0)


@dataclass
class Node:
    counts: Counter
    attribute: str | None = None
    gain: float = 0.0
    children: dict = field(default_factory=dict)  # bool -> Node

    @property
    def is_leaf(self) -> bool:
        return self.attribute is None

    @property
    def size(self) -> int:
        return sum(self.counts.values())

    def majority(self):
        return min(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def leaves(self, path=()):
        if self.is_leaf:
            yield path, self
            return
        for v in (False, True):
            yield from self.children[v].leaves(path + ((self.attribute, v),))

    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(c.depth() for c in self.children.values())


def information_gain(examples, attribute: str) -> float:
    parent = entropy(Counter(e.label for e in examples))
    n = len(examples)
    rest = 0.0
    for v in (False, True):
        part = [e for e in examples if e.attributes[attribute] == v]
        if part:
            rest += len(part) / n * entropy(Counter(e.label for e in part))
    return parent - rest


# critical chi-squared values at p = 0.05 by degrees of freedom
CHI2_CRITICAL = {1: 3.841, 2: 5.991, 3: 7.815}


def split_chi2(examples, attribute: str) -> float:
    """Pearson statistic of the label-by-attribute contingency table."""
    n = len(examples)
    labels = Counter(e.label for e in examples)
    stat = 0.0
    for v in (False, True):
        part = Counter(e.label for e in examples if e.attributes[attribute] == v)
        size = sum(part.values())
        for lab, total in labels.items():
            expected = total * size / n
            if expected > 0:
                stat += (part[lab] - expected) ** 2 / expected
    return stat


def build_tree(examples, max_depth: int = 6, attributes=None, significance: bool = True,
               collapse: bool = False) -> Node:
    """ID3 with ties broken by attribute name.

    With ``collapse`` a subtree whose leaves all predict the same label
    is replaced by a single leaf. With ``significance`` a node is split only when the chosen split is
    significant at p = 0.05 under a chi-squared test (Quinlan's
    pre-pruning), which keeps label noise from producing spurious leaves.
    """
    examples = list(examples)
    if not examples:
        raise ValueError("cannot build a tree from no examples")
    attrs = sorted(attributes if attributes is not None else examples[0].attributes)
    tree = _grow(examples, attrs, max_depth, significance)
    return _collapse(tree) if collapse else tree


def _collapse(node: Node) -> Node:
    if node.is_leaf:
        return node
    node.children = {v: _collapse(c) for v, c in node.children.items()}
    if all(c.is_leaf for c in node.children.values()) and \
            len({c.majority()[0] for c in node.children.values()}) == 1:
        return Node(node.counts)
    return node


def _grow(examples, attrs, depth, significance=True) -> Node:
    node = Node(Counter(e.label for e in examples))
    if len(node.counts) == 1 or depth == 0:
        return node
    best, best_gain = None, 1e-12
    for a in attrs:
        vals = {e.attributes[a] for e in examples}
        if len(vals) < 2:
            continue
        g = information_gain(examples, a)
        if g > best_gain + 1e-12:
            best, best_gain = a, g
    if best is None:
        return node
    if significance and split_chi2(examples, best) < CHI2_CRITICAL.get(len(node.counts) - 1, 7.815):
        return node
    node.attribute, node.gain = best, best_gain
    rest = [a for a in attrs if a != best]
    for v in (False, True):
        node.children[v] = _grow([e for e in examples if e.attributes[best] == v], rest, depth - 1,
                                 significance)
    return node


# ---------------------------------------------------------------- candidate axioms

def simplify(conditions) -> tuple:
    """Drop tests implied by other tests on the same path."""
    cond = dict(conditions)
    pos = {a for a, v in cond.items() if v}
    neg = {a for a, v in cond.items() if not v}
    drop = set()
    for a in pos:
        drop.update(i for i in VOCABULARY[a].implies if i in pos)
    for a in neg:
        # a implies b and b is false, so a is false too
        if any(b in neg for b in VOCABULARY[a].implies):
            drop.add(a)
    return tuple(sorted((a, v) for a, v in cond.items() if a not in drop))


@dataclass(frozen=True)
class CandidateAxiom:
    label: str
    conditions: tuple  # ((attribute, value), ...) sorted
    kind: str = "normal"  # normal or default

    @property
    def head(self) -> str:
        return HEAD[self.label]

    @property
    def body(self) -> tuple:
        lits, k = [], 0
        for a, v in self.conditions:
            att = VOCABULARY[a]
            forms = att.positive if v else att.negative
            var = "B"
            if v and any("B" in f for f in forms):
                var = "BCDEFGH"[k]
                k += 1
            lits += [_rename(f, var) for f in forms]
        if self.kind == "default":
            h = self.head
            lits.append("not " + (h[1:] if h.startswith("-") else "-" + h))
        return tuple(lits)

    @property
    def text(self) -> str:
        return f"{self.head} :- {', '.join(self.body)}."

    def rule(self):
        return parse_rule(self.text)

    def matches(self, attributes: dict) -> bool:
        return all(attributes[a] == v for a, v in self.conditions)

    def __str__(self):
        return self.text


def _rename(lit: str, var: str) -> str:
    if var == "B":
        return lit
    return lit.replace(", B)", f", {var})").replace("(B,", f"({var},")


# purity thresholds below this learn default axioms
NORMAL_PURITY = 0.95


def extract_candidates(tree: Node, th1: float, th2: float, total_examples: int,
                       kind: str | None = None) -> list[CandidateAxiom]:
    """One candidate per leaf that is at least ``th1`` pure and covers ``th2`` of the examples."""
    if kind is None:
        kind = "default" if th1 < NORMAL_PURITY else "normal"
    out = []
    for path, leaf in tree.leaves():
        if not path:
            continue
        label, count = leaf.majority()
        if count / leaf.size >= th1 and leaf.size >= th2 * total_examples:
            out.append(CandidateAxiom(label, simplify(path), kind))
    return out


def validate(candidates, validation_set, th2: float, th1: float = 0.95) -> list[CandidateAxiom]:
    validation_set = list(validation_set)
    n = len(validation_set)
    kept = []
    for c in candidates:
        hits = [e for e in validation_set if c.matches(e.attributes)]
        if not n or len(hits) < th2 * n or not hits:
            continue
        agree = sum(e.label == c.label for e in hits)
        if agree / len(hits) >= th1:
            kept.append(c)
    return kept


@dataclass
class InductionConfig:
    th1: float = 0.95
    th2: float = 0.05
    th3: float = 0.40
    ensemble_count: int = 100
    max_depth: int = 6
    seed: int = 0


MIN_EXAMPLES = 10


def ensemble_induce(examples, config: InductionConfig | None = None) -> list[CandidateAxiom]:
    """Axioms that survive extraction and validation in at least ``th3`` of random half splits."""
    config = config or InductionConfig()
    examples = list(examples)
    if len(examples) < MIN_EXAMPLES:
        raise ValueError(f"need at least {MIN_EXAMPLES} examples, got {len(examples)}")
    rng = np.random.default_rng(config.seed)
    votes: Counter = Counter()
    for _ in range(config.ensemble_count):
        order = rng.permutation(len(examples))
        half = len(examples) // 2
        train = [examples[i] for i in order[:half]]
        held = [examples[i] for i in order[half:]]
        # defaults are read off the most general node on which the subtree agrees
        tree = build_tree(train, config.max_depth, collapse=config.th1 < NORMAL_PURITY)
        found = validate(extract_candidates(tree, config.th1, config.th2, len(train)), held,
                         config.th2, config.th1)
        votes.update(set(found))
    chosen = [c for c, v in votes.items() if v >= config.th3 * config.ensemble_count]
    return sorted(chosen, key=lambda c: c.text)


# ---------------------------------------------------------------- axiom store

@dataclass
class AxiomRecord:
    text: str
    strength: float = 1.0
    alpha: float = 1.0
    n: int = 0
    learned_cycle: int = 0
    reinforcements: int = 0
    last_reinforced: int = -1

    @property
    def head(self) -> str:
        return self.text.split(":-")[0].strip()

    @property
    def body(self) -> list[str]:
        if ":-" not in self.text:
            return []
        return [str(b) for b in parse_rule(self.text).body] + [str(c) for c in parse_rule(self.text).cmps]


@dataclass
class AxiomStore:
    records: dict = field(default_factory=dict)  # text -> AxiomRecord
    cycle: int = 0
    log: list = field(default_factory=list)  # (cycle, event, text)

    def __contains__(self, text) -> bool:
        return canonical(text) in self.records

    def __len__(self):
        return len(self.records)

    def texts(self) -> list[str]:
        return sorted(self.records)

    def rules(self):
        return [parse_rule(t) for t in self.texts()]

    def add(self, text: str) -> AxiomRecord:
        text = canonical(text)
        rec = AxiomRecord(text, learned_cycle=self.cycle)
        self.records[text] = rec
        self.log.append((self.cycle, "learned", text))
        return rec

    def dumps(self) -> str:
        lines = [STORE_HEADER, f"% cycle={self.cycle}"]
        for t in self.texts():
            r = self.records[t]
            lines.append(f"% strength={r.strength!r}, alpha={r.alpha!r}, n={r.n}, "
                         f"learned_cycle={r.learned_cycle}, reinforcements={r.reinforcements}, "
                         f"last_reinforced={r.last_reinforced}")
            lines.append(t)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "AxiomStore":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != STORE_HEADER:
            raise ValueError("not an axiom store (missing header)")
        store, meta = cls(), {}
        for ln in lines[1:]:
            if ln.startswith("%"):
                for part in ln[1:].split(","):
                    k, _, v = part.strip().partition("=")
                    meta[k] = v
                if "cycle" in meta:
                    store.cycle = int(meta.pop("cycle"))
                continue
            t = canonical(ln)
            store.records[t] = AxiomRecord(
                t, float(meta.get("strength", 1.0)), float(meta.get("alpha", 1.0)), int(meta.get("n", 0)),
                int(meta.get("learned_cycle", store.cycle)), int(meta.get("reinforcements", 0)),
                int(meta.get("last_reinforced", -1)))
            meta = {}
        return store


def canonical(text) -> str:
    return str(parse_rule(str(text).strip().rstrip(".") + "."))


def update_strength(store: AxiomStore) -> AxiomStore:
    for r in store.records.values():
        r.n += 1
        r.strength = math.exp(-r.alpha * r.n)
    return store


def reinforcement_divisor(store: AxiomStore, rec: AxiomRecord) -> float:
    m = max(1, store.cycle - rec.learned_cycle)
    return 2 ** (1 / m)


def reinforce(store: AxiomStore, text) -> AxiomStore:
    key = canonical(text)
    if key not in store.records:
        raise KeyError(f"unknown axiom: {text}")
    rec = store.records[key]
    if rec.last_reinforced == store.cycle:
        return store  # at most once per cycle
    rec.last_reinforced = store.cycle
    rec.alpha /= reinforcement_divisor(store, rec)
    rec.strength, rec.n = 1.0, 0
    rec.reinforcements += 1
    store.log.append((store.cycle, "reinforced", key))
    return store


def advance(store: AxiomStore, th4: float = 0.10) -> AxiomStore:
    """Start the next cycle: decay every axiom, then drop the weak ones."""
    store.cycle += 1
    return prune(update_strength(store), th4)


def prune(store: AxiomStore, th4: float = 0.10) -> AxiomStore:
    for t in list(store.records):
        if store.records[t].strength < th4:
            del store.records[t]
            store.log.append((store.cycle, "pruned", t))
    return store


def _content(rule) -> set[str]:
    """Body literals other than the default marker ``not <complement of head>``."""
    marker = None
    if rule.head is not None:
        h = rule.head
        comp = Atom(h.pred, h.args, not h.neg)
        marker = str(Lit(comp, naf=True))
    return {str(x) for x in rule.body} - {marker}


def _similar(a: str, b: str) -> bool:
    ra, rb = parse_rule(a), parse_rule(b)
    if str(ra.head) != str(rb.head):
        return False
    return bool(_content(ra) & _content(rb))


def group_axioms(texts) -> list[list[str]]:
    texts = sorted(set(texts))
    parent = {t: t for t in texts}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in itertools.combinations(texts, 2):
        if _similar(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict = {}
    for t in texts:
        groups.setdefault(find(t), []).append(t)
    return [sorted(g) for _, g in sorted(groups.items())]


MAX_COMBINATIONS = 512
MAX_GROUP = 6


def _subsets(group) -> list[tuple]:
    group = group[:MAX_GROUP]
    out = [c for k in range(1, len(group) + 1) for c in itertools.combinations(group, k)]
    return sorted(out, key=lambda c: (len(c), c))


def _body_length(t: str) -> int:
    r = parse_rule(t)
    return len(r.body) + len(r.cmps)


def add_merge(store: AxiomStore, new_axioms, eval_scenes, score) -> AxiomStore:
    """Merge ``new_axioms`` into ``store``, keeping the best versions of each group of similar axioms.

    ``score(axiom_texts, eval_scenes)`` returns the label accuracy of a
    knowledge base extended with the given axioms. For every group the
    non-empty subset with the best joint score survives; ties go to
    fewer body literals in total, so a redundant over-specified version
    is dropped. Re-learned axioms are reinforced.
    """
    eval_scenes = list(eval_scenes)
    if not eval_scenes:
        raise ValueError("merging needs at least one evaluation scene")
    incoming = []
    for a in new_axioms:
        t = canonical(a)
        if t in store.records:
            reinforce(store, t)
        elif t not in incoming:
            incoming.append(t)
    groups = group_axioms(list(store.records) + incoming)
    fixed = [g[0] for g in groups if len(g) == 1]
    multi = [g for g in groups if len(g) > 1]
    best, best_key = None, None
    for k, choice in enumerate(itertools.product(*(_subsets(g) for g in multi))):
        if k >= MAX_COMBINATIONS:
            break
        combo = tuple(t for part in choice for t in part)
        acc = score(fixed + list(combo), eval_scenes)
        key = (-acc, sum(_body_length(t) for t in combo), combo)
        if best_key is None or key < best_key:
            best, best_key = combo, key
    keep = set(fixed) | set(best or ())
    for t in list(store.records):
        if t not in keep:
            del store.records[t]
            store.log.append((store.cycle, "merged_out", t))
    for t in incoming:
        if t in keep:
            store.add(t)
        else:
            store.log.append((store.cycle, "rejected", t))
    return store
