"""Reference implementations that share no code with the package under test."""
from __future__ import annotations

import itertools
import math
import random


# ---------------------------------------------------------------- propositional answer sets

def parse_ground(text):
    """``(head, pos, neg, is_cr)`` tuples from ground rule text; head is None for constraints."""
    rules = []
    for raw in text.split("."):
        raw = raw.strip()
        if not raw:
            continue
        is_cr = ":+" in raw
        head, _, body = raw.partition(":+" if is_cr else ":-")
        pos, neg = [], []
        for item in filter(None, (b.strip() for b in body.split(","))):
            (neg if item.startswith("not ") else pos).append(item[4:].strip() if item.startswith("not ") else item)
        rules.append((head.strip() or None, tuple(pos), tuple(neg), is_cr))
    return rules


def _least(rules):
    model, changed = set(), True
    while changed:
        changed = False
        for head, pos in rules:
            if all(p in model for p in pos):
                if head is None:
                    return None
                if head not in model:
                    model.add(head)
                    changed = True
    return model


def _is_answer_set(rules, cand):
    if any(("-" + a) in cand for a in cand if not a.startswith("-")):
        return False
    reduct = [(h, pos) for h, pos, neg, _ in rules if not any(n in cand for n in neg)]
    return _least(reduct) == cand


def literals(rules):
    out = set()
    for h, pos, neg, _ in rules:
        out.update(pos)
        out.update(neg)
        if h is not None:
            out.add(h)
    return sorted(out)


def answer_sets(text):
    rules = [r for r in parse_ground(text) if not r[3]]
    lits = literals(parse_ground(text))
    found = []
    for k in range(len(lits) + 1):
        for combo in itertools.combinations(lits, k):
            if _is_answer_set(rules, set(combo)):
                found.append(frozenset(combo))
    return set(found)


def cr_answer_sets(text):
    """Minimal number of CR rules to apply, and the answer sets (with applied rule sets) at that size."""
    parsed = parse_ground(text)
    regular = [r for r in parsed if not r[3]]
    cr = [r for r in parsed if r[3]]
    lits = literals(parsed)
    for k in range(len(cr) + 1):
        out = set()
        for chosen in itertools.combinations(range(len(cr)), k):
            rules = regular + [(cr[i][0], cr[i][1], cr[i][2], False) for i in chosen]
            for n in range(len(lits) + 1):
                for combo in itertools.combinations(lits, n):
                    if _is_answer_set(rules, set(combo)):
                        out.add((frozenset(combo), chosen))
        if out:
            return k, out
    return None, set()


def random_program(rng: random.Random, max_names=6, max_rules=25, cr_rules=0):
    """Random ground program with classical and default negation (at most ``2*max_names`` literals)."""
    names = [f"p{i}" for i in range(rng.randint(2, max_names))]
    lits = names + ["-" + n for n in names[:rng.randint(0, len(names))]]
    out = []
    for _ in range(rng.randint(1, max_rules)):
        body = [("not " if rng.random() < 0.5 else "") + rng.choice(lits) for _ in range(rng.randint(0, 3))]
        head = "" if rng.random() < 0.15 else rng.choice(lits)
        if not head and not body:
            continue
        out.append(f"{head} :- {', '.join(body)}." if body else f"{head}.")
    for _ in range(cr_rules):
        body = [("not " if rng.random() < 0.5 else "") + rng.choice(lits) for _ in range(rng.randint(0, 2))]
        out.append(f"{rng.choice(lits)} :+ {', '.join(body)}." if body else f"{rng.choice(lits)} :+ .")
    return "\n".join(out)


def abduction_instance(rng: random.Random, abducibles=4):
    """An observation ``obs`` that only a combination of abducible causes can explain.

    Causes enter through CR rules; some derivations are blocked by
    default-negated causes, and a random constraint may rule out pairs.
    """
    causes = [f"c{i}" for i in range(abducibles)]
    out = [":- not obs."]
    for _ in range(rng.randint(1, 3)):
        pos = rng.sample(causes, rng.randint(1, 2))
        rest = [c for c in causes if c not in pos]
        neg = rng.sample(rest, rng.randint(0, min(1, len(rest))))
        out.append("obs :- " + ", ".join(pos + ["not " + c for c in neg]) + ".")
    if rng.random() < 0.5:
        out.append(":- " + ", ".join(rng.sample(causes, 2)) + ".")
    for c in causes:
        guard = rng.choice(["", "", f"not -{c}"])
        out.append(f"{c} :+ {guard}.")
        if guard and rng.random() < 0.3:
            out.append(f"-{c}.")
    return "\n".join(out)


# ---------------------------------------------------------------- histogram arithmetic

def chi_squared(h, g):
    total = 0.0
    for a, b in zip(h, g):
        if a + b > 0:
            total += (a - b) ** 2 / (2 * (a + b))
    return total


def intersection(h, g):
    return sum(min(a, b) for a, b in zip(h, g))


# ---------------------------------------------------------------- axiom strength

def strength_trace(cycles, reinforced_at=(), alpha=1.0):
    """Strength after each cycle start for an axiom learned at cycle 0."""
    n, out = 0, []
    for c in range(1, cycles):
        n += 1
        s = math.exp(-alpha * n)
        if c in reinforced_at:
            alpha /= 2 ** (1 / c)
            n, s = 0, 1.0
        out.append(s)
    return out


# ---------------------------------------------------------------- two-layer network

def masked_bce(w1, b1, w2, b2, x, y, mask):
    """Loss of one example computed with scalar loops: tanh hidden layer, logistic outputs."""
    hidden = [math.tanh(sum(w * xi for w, xi in zip(row, x)) + b) for row, b in zip(w1, b1)]
    total = 0.0
    for row, b, t, m in zip(w2, b2, y, mask):
        z = sum(w * h for w, h in zip(row, hidden)) + b
        p = 1 / (1 + math.exp(-z))
        total += m * -(t * math.log(p) + (1 - t) * math.log(1 - p))
    return total
