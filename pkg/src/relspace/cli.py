"""Command-line entry point: ``relspace <subcommand> [options]``."""
from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import grounding as G
from . import induction as ind
from . import learner
from .harness import io
from .harness.experiments import EXPERIMENTS, derive_seed, planning_arms, run_experiment
from .harness.pipeline import relation_facts, run_pipeline, scene_facts
from .harness.report import ConfigError, parse_config
from .logic import kb
from .logic.parser import parse_program
from .logic.planner import NoPlan, plan
from .logic.reasoning import TASKS, infer
from .logic.terms import ProgramError
from .scene import ARRANGEMENTS, POSITION_RELATIONS, generate_pair, generate_scene, ground_truth, \
    relation_oracle, sample_scene_clouds

GLOBAL_DEFAULTS = {"seed": 0, "config": None, "out": None}


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    p.add_argument("--config", default=argparse.SUPPRESS, help="key=value configuration file")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    return p


def _config(args) -> dict:
    if not args.config:
        return {}
    return parse_config(Path(args.config).read_text())


def _out_dir(args, default=".") -> Path:
    d = Path(args.out or default)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------- subcommands

def cmd_gen_scenes(args) -> int:
    out = _out_dir(args, "scenes")
    kinds = ARRANGEMENTS if args.arrangement == "mixed" else (args.arrangement,)
    for k in range(args.count):
        arrangement = kinds[k % len(kinds)]
        scene = generate_scene(arrangement, derive_seed(args.seed, ARRANGEMENTS.index(arrangement), k))
        (out / f"scene_{k:05d}.json").write_text(io.dumps_scene(scene, ground_truth(scene)))
    print(f"wrote {args.count} scenes to {out}")
    return 0


def _load_scenes(directory):
    files = io.scene_files(directory)
    if not files:
        raise FileNotFoundError(f"no scene files in {directory}")
    return [io.loads_scene(f.read_text()) for f in files]


def cmd_ground(args) -> int:
    """Seed visual words from QSR labels on scene pairs, then refine them with labeled feedback pairs."""
    g = G.Grounder()
    rng = np.random.default_rng([args.seed, 5])
    if args.scenes:
        for scene, _ in _load_scenes(args.scenes):
            clouds = sample_scene_clouds(scene, args.points)
            for a in scene.ids:
                for b in scene.ids:
                    if a != b:
                        pos, dist = G.qsr_classify(clouds[b], clouds[a])
                        G.msr_update(g.store, pos, G.build_position_histogram(clouds[b], clouds[a]))
                        G.msr_update(g.store, dist, G.build_distance_histogram(clouds[a], clouds[b]))
    for k, rel in enumerate(POSITION_RELATIONS):
        for i in range(args.feedback_pairs):
            sc = generate_pair(rel, derive_seed(args.seed, k, i))
            clouds = sample_scene_clouds(sc, args.points)
            pos, dist = relation_oracle(sc, ("t", "r"), args.noise, rng)
            g.feedback(clouds["r"], clouds["t"], pos, dist)
    target = Path(args.store or (Path(args.out or ".") / "store.msr"))
    target.parent.mkdir(parents=True, exist_ok=True)
    io.save_msr(target, g.store)
    print(f"position grounding: {g.position_ctl.active}; distance grounding: {g.distance_ctl.active}")
    print(f"wrote {target}")
    return 0


def _objects_in(facts) -> list[str]:
    seen = {}
    for f in facts:
        name, _, rest = f.partition("(")
        args = [a.strip() for a in rest.rstrip(").").split(",")]
        if name == "obj_relation":
            for a in args[1:]:
                seen[a] = None
        elif name.startswith("obj_") and args:
            seen[args[0]] = None
    return list(seen)


def _read_facts(path) -> list[str]:
    text = Path(path).read_text()
    lines = [ln.split("%", 1)[0] for ln in text.splitlines()]
    return ["".join(f.split()) for f in " ".join(lines).split(".") if f.strip()]


def cmd_reason(args) -> int:
    if args.scenes:
        return _reason_scenes(args)
    if not args.facts:
        raise SystemExit("reason needs --facts (with --program) or --scenes")
    facts = _read_facts(args.facts)
    rel = [f for f in facts if f.startswith("obj_relation(")]
    attrs = [f for f in facts if not f.startswith("obj_relation(")]
    text = Path(args.program).read_text() if args.program else "\n".join(kb.AXIOM_TEXT.values())
    if "#sort object" in text:
        program = parse_program(text)
    else:
        program = parse_program(text, kb.scene_base(_objects_in(facts)))
        attrs += kb.height_facts(_objects_in(facts), rel)
    res = infer(program, rel, attrs, args.task)
    if res.diagnosis:
        print(f"% {res.diagnosis}")
    for target, label in sorted(res.labels.items()):
        print(f"{args.task}({target}) = {label}")
    return 0


def _reason_scenes(args) -> int:
    """Pipeline over a scene directory: decisions CSV plus ROI records for training and induction."""
    out = _out_dir(args)
    axioms = kb.base_axioms() if not args.program else parse_program(
        Path(args.program).read_text(), kb.scene_base(["o1"])).rules
    model = io.load_model(args.model) if args.model else None
    records = []
    with open(out / "decisions.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("scene", "task", "target", "value", "source", "truth"))
        for k, (scene, truth) in enumerate(_load_scenes(args.scenes)):
            truth = truth or ground_truth(scene)
            rel = relation_facts(scene)
            res = run_pipeline(scene, axioms, model, args.mode, relations=rel, truth=truth)
            for (task, target), d in sorted(res.decisions.items()):
                want = truth.occluded[target] if task == "occlusion" else truth.stable[target]
                w.writerow((k, task, target, d.value, d.source, want))
            attrs = {o.id: o for o in scene.objects}
            by_roi = {}
            for task in res.induction_examples:
                for e in res.induction_examples[task]:
                    by_roi.setdefault(e.roi, []).append(e)
            for ex in res.learner_examples:
                task, members = ex.roi.split(":", 1)
                records.append(io.roi_record(task, members.split(","), rel, attrs, ex, by_roi.get(ex.roi, ())))
    if args.rois:
        io.write_jsonl(args.rois, records)
        print(f"wrote {len(records)} region records to {args.rois}")
    print(f"wrote {out / 'decisions.csv'}")
    return 0


def cmd_train(args) -> int:
    records = io.read_jsonl(args.examples)
    if not records:
        raise SystemExit(f"no examples in {args.examples}")
    cfg = learner.TrainConfig(args.learning_rate, args.epochs, args.seed, args.batch_size)
    history = []
    model = learner.train([io.learner_example(r) for r in records], cfg, history)
    target = Path(args.out or "model.mlp")
    io.save_model(target, model)
    print(f"trained on {len(records)} regions; final loss {history[-1]:.6f}; wrote {target}")
    return 0


def cmd_induce(args) -> int:
    """Learning cycles over example records split evenly into ``--cycles`` batches."""
    records = io.read_jsonl(args.examples)
    known = set()
    if args.kb:
        known = {ind.canonical(r) for r in parse_program(Path(args.kb).read_text(), kb.scene_base(["o1"])).rules
                 if r.head is not None}
    store = io.load_store(args.store) if args.store else ind.AxiomStore()
    pools = {t: [] for t in TASKS}
    batches = np.array_split(np.arange(len(records)), args.cycles)
    for cycle, idx in enumerate(batches):
        if cycle or args.store:
            ind.advance(store, args.th4)
        for i in idx:
            for e in io.induction_examples(records[int(i)]):
                pools[records[int(i)]["task"]].append(e)
        found = []
        for task, pool in pools.items():
            if len(pool) >= ind.MIN_EXAMPLES:
                cfg = ind.InductionConfig(th1=args.th1, seed=derive_seed(args.seed, cycle))
                found += [c.text for c in ind.ensemble_induce(pool, cfg) if ind.canonical(c.text) not in known]
        if found:
            # without evaluation scenes every version scores alike and the shortest wins
            ind.add_merge(store, found, [None], lambda texts, _: 0.0)
    target = Path(args.out or "store.ax")
    io.save_store(target, store)
    print(store.dumps(), end="")
    print(f"% wrote {target}")
    return 0


def _pairs(text, sep):
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, _, value = item.partition(sep)
        out[key.strip()] = value.strip()
    return out


def cmd_plan(args) -> int:
    objects = {}
    for item in filter(None, (s.strip() for s in args.objects.split(","))):
        parts = item.split(":")
        if len(parts) != 3:
            raise SystemExit(f"object spec must be id:size:surface, got {item!r}")
        objects[parts[0]] = (parts[1], parts[2])
    placement = _pairs(args.placement, "=")
    sd = kb.tabletop_domain(objects)
    history = kb.initial_history(sd, placement)
    arms = planning_arms()
    rules = arms["without" if args.without_learned else "with"]
    if args.axioms:
        rules = arms["without"] + kb.planning_axioms(io.load_store(args.axioms).rules())
    try:
        plans, horizon = plan(sd, history, args.goal, args.max_horizon, extra_rules=rules)
    except NoPlan as e:
        print(f"no plan: {e}")
        return 1
    print(f"{len(plans)} plan(s) of length {horizon}")
    for p in plans:
        print(p)
    return 0


def cmd_experiment(args) -> int:
    out = _out_dir(args, "reports")
    config = _config(args)
    names = EXPERIMENTS if args.name == "all" else (args.name,)
    for name in names:
        t0 = time.perf_counter()
        (rep,) = run_experiment(name, config, args.seed)
        rep.timing.append(f"wall-clock seconds: {time.perf_counter() - t0:.1f}")
        (out / f"{rep.name}.csv").write_text(rep.to_csv())
        if rep.plans:
            with open(out / f"{rep.name}_plans.csv", "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=list(rep.plans[0]), lineterminator="\n")
                w.writeheader()
                w.writerows(rep.plans)
        # timings vary run to run, so they stay out of the CSV reports
        (out / f"{rep.name}_timing.txt").write_text("\n".join(rep.timing) + "\n")
        print(f"wrote {out / (rep.name + '.csv')}")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="relspace", parents=[common],
                                     description="Reasoning, attention and learning over tabletop scenes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenes", parents=[common], help="generate labeled synthetic scenes")
    p.add_argument("--arrangement", choices=ARRANGEMENTS + ("mixed",), default="mixed")
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_gen_scenes)

    p = sub.add_parser("ground", parents=[common], help="build a visual-word store")
    p.add_argument("--scenes", help="directory of scenes whose pairs seed the words via QSR labels")
    p.add_argument("--feedback-pairs", type=int, default=7)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--store", help="output store file (default OUT/store.msr)")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("reason", parents=[common], help="label scenes by logical reasoning")
    p.add_argument("--program", help="program or axiom file (.lp); built-in axioms when absent")
    p.add_argument("--facts", help="fact file for a single scene")
    p.add_argument("--task", choices=sorted(TASKS), default="stability")
    p.add_argument("--scenes", help="run the full pipeline over a scene directory instead")
    p.add_argument("--mode", choices=("train", "test"), default="train")
    p.add_argument("--model", help="learner model for test mode")
    p.add_argument("--rois", help="write region records (JSON lines) here")
    p.set_defaults(func=cmd_reason)

    p = sub.add_parser("train", parents=[common], help="train the region learner")
    p.add_argument("--examples", required=True)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("induce", parents=[common], help="learn axioms from region records")
    p.add_argument("--examples", required=True)
    p.add_argument("--kb", help="axioms already known; candidates equal to one are skipped")
    p.add_argument("--store", help="existing axiom store to continue from")
    p.add_argument("--cycles", type=int, default=10)
    p.add_argument("--th1", type=float, default=0.95)
    p.add_argument("--th4", type=float, default=0.10)
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("plan", parents=[common], help="plan in the pick-and-place domain")
    p.add_argument("--objects", required=True, help="id:size:surface,...")
    p.add_argument("--placement", required=True, help="id=location,... for every object")
    p.add_argument("--goal", action="append", required=True, help="fluent literal, e.g. 'on(a, b)'")
    p.add_argument("--max-horizon", type=int, default=8)
    p.add_argument("--axioms", help="axiom store to plan with")
    p.add_argument("--without-learned", action="store_true", help="omit the learned support axiom")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("experiment", parents=[common], help="run an experiment suite")
    p.add_argument("name", choices=EXPERIMENTS + ("all",))
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        return args.func(args)
    except (ConfigError, ProgramError, io.FormatError, FileNotFoundError, ValueError) as e:
        print(f"relspace: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
