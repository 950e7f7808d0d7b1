"""Desk-scale experiment suites. Every number in a report is a function of (params, seed)."""
from __future__ import annotations

import statistics
import time
from collections import Counter

import numpy as np

from .. import grounding as G
from .. import induction as ind
from .. import learner
from ..logic import kb
from ..logic.planner import NoPlan, plan
from ..logic.reasoning import infer
from ..logic.parser import parse_rule
from ..scene import ARRANGEMENTS, POSITION_RELATIONS, generate_pair, generate_scene, ground_truth, \
    relation_oracle, sample_scene_clouds
from . import world as W
from .pipeline import TASKS, UNDECIDED, fill_gaps, relation_facts, run_pipeline, scene_facts
from .report import ConfigError, ExperimentReport, resolve

EXPERIMENTS = ("grounding", "attention", "induction", "planning")


def derive_seed(*keys: int) -> int:
    return int(np.random.default_rng([int(k) for k in keys]).integers(2**31 - 1))


def _check_positive(params, *names):
    for n in names:
        if params[n] <= 0:
            raise ConfigError(f"{n} must be positive, got {params[n]}")


# ---------------------------------------------------------------- grounding

GROUNDING_DEFAULTS = {"subsets": 10, "feedback_pairs": 7, "qsr_pairs": 200, "test_pairs": 200,
                      "points_per_object": 200, "noise": 0.0}


def _pair(seed, relation, points, noise, rng):
    sc = generate_pair(relation, seed)
    clouds = sample_scene_clouds(sc, points)
    pos, dist = relation_oracle(sc, ("t", "r"))
    if noise > 0 and rng.uniform() < noise:
        pos = POSITION_RELATIONS[int(rng.integers(len(POSITION_RELATIONS)))]
    return clouds["r"], clouds["t"], pos, dist


def experiment_grounding(config=None, seed: int = 0) -> ExperimentReport:
    """Three ways of grounding spatial relations, compared on held-out pairs.

    ``msr_feedback``: visual words from the feedback pairs only.
    ``msr_qsr_feedback``: words seeded with QSR-labeled pairs, then feedback.
    ``combined``: the controller choosing between the second model and QSR.
    ``qsr`` is reported as a reference. Accuracy is on position relations.
    """
    p = resolve("grounding", GROUNDING_DEFAULTS, config)
    _check_positive(p, "subsets", "qsr_pairs", "test_pairs", "points_per_object")
    if p["feedback_pairs"] < 0 or not 0 <= p["noise"] <= 1:
        raise ConfigError("feedback_pairs must be >= 0 and noise in [0, 1]")
    rep = ExperimentReport("grounding", p, seed)
    rels, pts = POSITION_RELATIONS, p["points_per_object"]
    schemes = ("msr_feedback", "msr_qsr_feedback", "combined", "qsr")
    for sub in range(p["subsets"]):
        rng = np.random.default_rng([seed, sub, 7])
        fb = [_pair(derive_seed(seed, sub, 1, k, i), r, pts, p["noise"], rng)
              for k, r in enumerate(rels) for i in range(p["feedback_pairs"])]
        qsr_set = [_pair(derive_seed(seed, sub, 2, i), rels[i % len(rels)], pts, 0.0, rng)
                   for i in range(p["qsr_pairs"])]
        test = [_pair(derive_seed(seed, sub, 3, i), rels[i % len(rels)], pts, 0.0, rng)
                for i in range(p["test_pairs"])]
        g1 = G.Grounder()
        for r, t, pos, dist in fb:
            g1.feedback(r, t, pos, dist)
        g2 = G.Grounder()
        for r, t, _, _ in qsr_set:
            qp, qd = G.qsr_classify(r, t)
            G.msr_update(g2.store, qp, G.build_position_histogram(r, t))
            G.msr_update(g2.store, qd, G.build_distance_histogram(t, r))
        for r, t, pos, dist in fb:
            g2.feedback(r, t, pos, dist)
        predict = {
            "msr_feedback": lambda r, t: g1.classify(r, t, "msr")[0],
            "msr_qsr_feedback": lambda r, t: g2.classify(r, t, "msr")[0],
            "combined": lambda r, t: g2.classify(r, t, "combined")[0],
            "qsr": lambda r, t: G.qsr_position(r, t),
        }
        for name in schemes:
            acc = float(np.mean([predict[name](r, t) == pos for r, t, pos, _ in test]))
            rep.add("accuracy", name, sub, acc)
        rep.add("controller_choice", "combined", sub, g2.position_ctl.active)
    for name in schemes:
        vals = rep.values("accuracy", name)
        rep.add("accuracy_mean", name, "all", float(np.mean(vals)))
        rep.add("accuracy_std", name, "all", float(np.std(vals)))
    return rep


# ---------------------------------------------------------------- attention

ATTENTION_DEFAULTS = {"budgets": (100, 200, 1000), "seeds": 10, "pool": 1000, "test_scenes": 200,
                      "epochs": 300, "learning_rate": 0.05, "batch_size": 32, "hidden": 32}


def _scenes(seed, tag, n):
    return [generate_scene(ARRANGEMENTS[k % len(ARRANGEMENTS)], derive_seed(seed, tag, k)) for k in range(n)]


def check_invariants(result) -> int:
    """Count violations of the short-circuit and train-on-failure rules in one training trace."""
    bad = 0
    failed = {(roi.task, target) for roi, target, _ in result.rois}
    if not failed and (result.learner_examples or any(result.induction_examples.values())):
        bad += 1
    roi_ids = {f"{roi.task}:{','.join(roi.members)}" for roi, _, _ in result.rois}
    bad += sum(1 for e in result.learner_examples if e.roi not in roi_ids)
    for key, d in result.decisions.items():
        if d.source == "reasoning" and key in failed:
            bad += 1
    return bad


def _whole_scene_example(scene, rel, truth):
    return learner.make_example(scene.ids, rel, {o.id: o for o in scene.objects},
                                occluded=truth.occluded, stable=all(truth.stable.values()), roi="scene")


def _whole_scene_decisions(model, scene, rel):
    x = learner.featurize_roi(scene.ids, rel, {o.id: o for o in scene.objects})
    probs, _ = learner.predict(model, x)
    ids = sorted(scene.ids)
    out = {("occlusion", o): bool(probs[ids.index(o)] >= 0.5) for o in scene.ids}
    for sid in scene.structure_ids():
        out[("stability", sid)] = bool(probs[learner.STABILITY] >= 0.5)
    return out


def _accuracy(decisions: dict, truth) -> float:
    hits = 0
    for (task, target), d in decisions.items():
        v = getattr(d, "value", d)
        want = truth.occluded[target] if task == "occlusion" else truth.stable[target]
        hits += int(v != UNDECIDED and bool(v) == want)
    return hits / len(decisions)


def experiment_attention(config=None, seed: int = 0) -> ExperimentReport:
    """Learner trained on reasoning-failure regions versus a learner on whole scenes.

    ``roi``: reasoning labels what it can and the learner, trained only on
    regions around reasoning failures, fills the rest. ``whole_scene``:
    the learner alone, trained on every scene. Both are scored per target
    (object occlusion, structure stability) on the same test scenes.
    """
    p = resolve("attention", ATTENTION_DEFAULTS, config)
    _check_positive(p, "seeds", "pool", "test_scenes", "epochs", "hidden")
    budgets = tuple(p["budgets"])
    if not budgets or min(budgets) <= 0 or max(budgets) > p["pool"] or list(budgets) != sorted(set(budgets)):
        raise ConfigError(f"budgets must be increasing, positive and at most pool={p['pool']}: {budgets}")
    rep = ExperimentReport("attention", p, seed)
    axioms = kb.base_axioms()
    violations = 0
    train = []
    for scene in _scenes(seed, 1, p["pool"]):
        truth = ground_truth(scene)
        rel = relation_facts(scene)
        res = run_pipeline(scene, axioms, mode="train", relations=rel, truth=truth)
        violations += check_invariants(res)
        train.append((res.learner_examples, _whole_scene_example(scene, rel, truth)))
    test = []
    for scene in _scenes(seed, 2, p["test_scenes"]):
        truth = ground_truth(scene)
        rel = relation_facts(scene)
        test.append((scene, rel, truth, run_pipeline(scene, axioms, mode="test", relations=rel)))
    reasoned = float(np.mean([sum(d.source == "reasoning" for d in r.decisions.values()) / len(r.decisions)
                              for _, _, _, r in test]))
    rep.add("reasoning_coverage", "roi", "test", reasoned)
    for s in range(p["seeds"]):
        order = np.random.default_rng([seed, s, 3]).permutation(len(train))
        for budget in budgets:
            chosen = [train[i] for i in order[:budget]]
            cfg = learner.TrainConfig(p["learning_rate"], p["epochs"], derive_seed(seed, s, budget),
                                      p["batch_size"], p["hidden"])
            roi_examples = [e for exs, _ in chosen for e in exs]
            roi_model = learner.train(roi_examples, cfg) if roi_examples else None
            whole_model = learner.train([w for _, w in chosen], cfg)
            acc_roi, acc_whole = [], []
            for scene, rel, truth, res in test:
                dec = fill_gaps(res, roi_model, scene, rel) if roi_model else res.decisions
                acc_roi.append(_accuracy(dec, truth))
                acc_whole.append(_accuracy(_whole_scene_decisions(whole_model, scene, rel), truth))
            rep.add("accuracy", "roi", f"{budget}/{s}", float(np.mean(acc_roi)))
            rep.add("accuracy", "whole_scene", f"{budget}/{s}", float(np.mean(acc_whole)))
            rep.add("training_examples", "roi", f"{budget}/{s}", len(roi_examples))
    for budget in budgets:
        for v in ("roi", "whole_scene"):
            vals = [rep.value("accuracy", v, f"{budget}/{s}") for s in range(p["seeds"])]
            rep.add("accuracy_median", v, budget, float(statistics.median(vals)))
        wins = sum(rep.value("accuracy", "roi", f"{budget}/{s}") >= rep.value("accuracy", "whole_scene", f"{budget}/{s}")
                   for s in range(p["seeds"]))
        rep.add("roi_at_least_whole", "", budget, wins)
    rep.add("invariant_violations", "", "train", violations)
    return rep


# ---------------------------------------------------------------- induction

INDUCTION_DEFAULTS = {"sets": 10, "scenes": 50, "repetitions": 3, "thresholds": (0.95, 0.70),
                      "eval_scenes": 10, "ensemble_count": 100, "th2": 0.05, "th3": 0.40, "th4": 0.10}
NORMAL_TARGETS = tuple(kb.AXIOM_TEXT[n] for n in kb.TARGET_AXIOMS)
DEFAULT_TARGETS = (kb.AXIOM_TEXT["large_on_small_default"],)


def axiom_key(text) -> tuple:
    """Identity of an axiom up to body order."""
    r = parse_rule(str(text).strip().rstrip(".") + ".")
    return str(r.head), frozenset(str(b) for b in r.body), frozenset(str(c) for c in r.cmps)


def score_axioms(learned, targets) -> tuple[int, int, int]:
    """(TP, FP, FN): exact matches count, any other learned axiom (including variants) is an error."""
    want = {axiom_key(t) for t in targets}
    got = {axiom_key(t) for t in learned}
    tp = len(want & got)
    return tp, len(got - want), len(want - got)


class _EvalScenes:
    """Reasoning-only label accuracy of a knowledge base on fixed scenes."""

    def __init__(self, scenes):
        self.items = []
        for sc in scenes:
            rel = relation_facts(sc)
            self.items.append((sc, rel, scene_facts(sc, rel), ground_truth(sc)))

    def __call__(self, base_axioms, texts) -> float:
        axioms = list(base_axioms) + [parse_rule(t) for t in texts]
        hits = total = 0
        for sc, rel, facts, truth in self.items:
            program = kb.scene_program(sc.ids, axioms)
            for task in TASKS:
                targets = {sid: list(m) for sid, m in zip(sc.structure_ids(), sc.structures)} \
                    if task == "stability" else None
                labels = infer(program, rel, facts, task, targets).labels
                want = truth.occluded if task == "occlusion" else truth.stable
                for t, lab in labels.items():
                    total += 1
                    hits += int(lab != "unknown" and (lab == "positive") == want[t])
        return hits / max(total, 1)


def induction_run(kb_axioms, th1: float, seed: int, p: dict, log=None) -> ind.AxiomStore:
    """Ten (or ``sets``) learning cycles; examples accumulate across cycles."""
    store = ind.AxiomStore()
    pools = {t: [] for t in TASKS}
    evaluator = _EvalScenes(_scenes(seed, 9, p["eval_scenes"]))
    score = lambda texts, _scenes_unused: evaluator(kb_axioms, texts)  # noqa: E731
    for cycle in range(p["sets"]):
        if cycle:
            ind.advance(store, p["th4"])
        axioms = list(kb_axioms) + store.rules()
        used = set()
        for scene in _scenes(seed, 10 + cycle, p["scenes"]):
            res = run_pipeline(scene, axioms, mode="train")
            used |= res.fired_axioms
            for t in TASKS:
                pools[t].extend(res.induction_examples[t])
        for text in sorted(used):
            if text in store:
                ind.reinforce(store, text)
        found = []
        for t in TASKS:
            if len(pools[t]) >= ind.MIN_EXAMPLES:
                cfg = ind.InductionConfig(th1=th1, th2=p["th2"], th3=p["th3"], ensemble_count=p["ensemble_count"],
                                          seed=derive_seed(seed, cycle, TASKS.index(t)))
                found += [c.text for c in ind.ensemble_induce(pools[t], cfg)]
        if found:
            ind.add_merge(store, found, evaluator.items, score)
        if log is not None:
            log.append((cycle, sorted(store.records)))
    return store


def experiment_induction(config=None, seed: int = 0) -> ExperimentReport:
    """Recover axioms removed from the knowledge base.

    Runs at th1 >= 0.95 remove the three target state constraints; runs
    below that remove the large-on-small default and look for it. An
    axiom counts as recovered only in its exact minimal form.
    """
    p = resolve("induction", INDUCTION_DEFAULTS, config)
    _check_positive(p, "sets", "scenes", "repetitions", "eval_scenes", "ensemble_count")
    if not p["thresholds"] or not all(0.5 < t <= 1.0 for t in p["thresholds"]):
        raise ConfigError(f"thresholds must lie in (0.5, 1]: {p['thresholds']}")
    rep = ExperimentReport("induction", p, seed)
    for ti, th1 in enumerate(p["thresholds"]):
        normal = th1 >= 0.95
        variant = f"{'normal' if normal else 'default'}@{th1:.2f}"
        removed = kb.TARGET_AXIOMS if normal else ("large_on_small_default",)
        targets = NORMAL_TARGETS if normal else DEFAULT_TARGETS
        kb_axioms = kb.base_axioms(exclude=removed)
        totals = np.zeros(3, dtype=int)
        for r in range(p["repetitions"]):
            store = induction_run(kb_axioms, th1, derive_seed(seed, ti, r), p)
            tp, fp, fn = score_axioms(store.texts(), targets)
            totals += (tp, fp, fn)
            rep.add("tp", variant, r, tp)
            rep.add("fp", variant, r, fp)
            rep.add("fn", variant, r, fn)
            for k, text in enumerate(store.texts()):
                rec = store.records[text]
                rep.add("learned", variant, f"{r}/{k}", f"{text} % strength={rec.strength:.4f}")
        tp, fp, fn = (int(v) for v in totals)
        rep.add("precision", variant, "all", tp / (tp + fp) if tp + fp else 0.0)
        rep.add("recall", variant, "all", tp / (tp + fn) if tp + fn else 0.0)
    return rep


# ---------------------------------------------------------------- planning

PLANNING_DEFAULTS = {"trials": 40, "goals_per_state": 5, "min_objects": 3, "max_objects": 4,
                     "max_horizon": 6, "time_repeats": 5, "same_kb": False}


def planning_trials(seed: int, p: dict) -> list:
    """(world, start, goal, shortest length) tuples with reachable, not yet satisfied goals."""
    out, k = [], 0
    while len(out) < p["trials"]:
        rng = np.random.default_rng([seed, k, 11])
        k += 1
        world = W.random_world(rng, int(rng.integers(p["min_objects"], p["max_objects"] + 1)))
        start = W.random_state(rng, world)
        cands = [(a, b) for a in sorted(world.objects) for b in [W.TABLE] + sorted(world.objects) if a != b]
        n_goals = 0
        for i in rng.permutation(len(cands)):
            a, b = cands[i]
            goal = [f"on({a}, {b})"]
            best = world.shortest(start, goal, p["max_horizon"])
            if best:
                out.append((world, start, goal, best))
                n_goals += 1
            if n_goals == p["goals_per_state"] or len(out) == p["trials"]:
                break
        if k > 50 * p["trials"]:
            raise RuntimeError("could not generate enough planning trials")
    return out


def planning_arms(same_kb: bool = False) -> dict:
    """Planning-time stability axioms without and with the learned irregular-support constraint."""
    without = kb.planning_axioms(kb.base_axioms(exclude=("irregular_unstable",)))
    with_learned = without if same_kb else without + kb.planning_axioms([kb.axiom("irregular_unstable")])
    return {"without": without, "with": with_learned}


def experiment_planning(config=None, seed: int = 0) -> ExperimentReport:
    """Paired planning trials with and without learned axioms, judged by simulated execution."""
    p = resolve("planning", PLANNING_DEFAULTS, config)
    _check_positive(p, "trials", "goals_per_state", "min_objects", "max_horizon", "time_repeats")
    if not p["min_objects"] <= p["max_objects"] <= 5:
        raise ConfigError("need min_objects <= max_objects <= 5")
    rep = ExperimentReport("planning", p, seed)
    arms = planning_arms(p["same_kb"])
    counts = Counter()
    classes = {a: Counter() for a in arms}
    times = {a: [] for a in arms}
    for i, (world, start, goal, best) in enumerate(planning_trials(seed, p)):
        sd = kb.tabletop_domain(world.objects)
        history = kb.initial_history(sd, dict(start.on))
        for arm, rules in arms.items():
            elapsed = []
            for _ in range(p["time_repeats"]):
                t0 = time.perf_counter()
                try:
                    plans, horizon = plan(sd, history, goal, p["max_horizon"], extra_rules=rules)
                except NoPlan:
                    plans, horizon = [], -1
                elapsed.append(time.perf_counter() - t0)
            times[arm].append(statistics.median(elapsed))
            pick = np.random.default_rng([seed, i, 13]).integers(len(plans)) if plans else None
            chosen = plans[pick] if plans else None
            verdict = W.classify(world, start, chosen.actions, goal, best) if chosen else "incorrect"
            counts[arm] += len(plans)
            classes[arm][verdict] += 1
            rep.plans.append({"trial": i, "arm": arm, "goal": goal[0], "shortest": best, "horizon": horizon,
                              "plans": len(plans), "class": verdict, "plan": str(chosen) if chosen else ""})
    n = len(rep.plans) // len(arms)
    rep.add("trials", "", "all", n)
    rep.add("plan_count_ratio", "with/without", "all", counts["with"] / max(counts["without"], 1))
    for arm in arms:
        rep.add("plans", arm, "all", counts[arm])
        for c in ("optimal", "sub_optimal", "incorrect"):
            rep.add(f"{c}_fraction", arm, "all", classes[arm][c] / n)
    ratio = sum(times["with"]) / max(sum(times["without"]), 1e-12)
    rep.timing.append(f"planning time ratio with/without (sum of per-trial medians over "
                      f"{p['time_repeats']} repeats): {ratio:.3f}")
    example = execution_example_one()
    rep.add("example_plans", "with", "execution_example", len(example))
    rep.add("example_plan", "with", "execution_example", str(example[0]) if example else "")
    return rep


EXAMPLE_OBJECTS = {"red_can": ("medium", "flat"), "white_cube": ("medium", "flat"), "duck": ("medium", "irregular")}
EXAMPLE_PLACEMENT = {"red_can": "table", "white_cube": "red_can", "duck": "white_cube"}


def execution_example_one(learned=True, max_horizon: int = 8):
    """Red can onto the white cube while the duck sits on top of the cube, which sits on the can."""
    sd = kb.tabletop_domain(EXAMPLE_OBJECTS)
    history = kb.initial_history(sd, EXAMPLE_PLACEMENT)
    rules = planning_arms()["with" if learned else "without"]
    plans, _ = plan(sd, history, ["on(red_can, white_cube)"], max_horizon, extra_rules=rules)
    return plans


RUNNERS = {"grounding": experiment_grounding, "attention": experiment_attention,
           "induction": experiment_induction, "planning": experiment_planning}


def run_experiment(name: str, config=None, seed: int = 0) -> list[ExperimentReport]:
    if name == "all":
        return [RUNNERS[n](config, seed) for n in EXPERIMENTS]
    if name not in RUNNERS:
        raise ConfigError(f"unknown experiment {name!r}; expected one of {EXPERIMENTS + ('all',)}")
    return [RUNNERS[name](config, seed)]
