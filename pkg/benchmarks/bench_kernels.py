"""Compare the compiled and pure-Python answer set search kernels.

Kernel inputs are recorded once from real solver calls, then each kernel is
timed on exactly those inputs, so grounding cost is left out.

    python3 benchmarks/bench_kernels.py [--programs 200] [--repeats 5]
"""
import argparse
import random
import statistics
import time

from relspace.harness.experiments import execution_example_one
from relspace.logic import _kernels, _search_py, solver
from relspace.logic.grounder import ground_text


def random_program(rng, names, rules):
    atoms = [f"p{i}" for i in range(names)]
    lits = atoms + ["-" + a for a in atoms[: names // 2]]
    out = []
    for _ in range(rules):
        body = [("not " if rng.random() < 0.5 else "") + rng.choice(lits) for _ in range(rng.randint(1, 3))]
        out.append(f"{rng.choice(lits)} :- {', '.join(body)}.")
    return " ".join(out)


def record(workload):
    """Kernel argument tuples seen while running ``workload``."""
    calls, real = [], _kernels.enumerate_models

    def spy(*args):
        calls.append(args)
        return real(*args)

    _kernels.enumerate_models = spy
    try:
        workload()
    finally:
        _kernels.enumerate_models = real
    return calls


def timed(kernel, calls, repeats):
    runs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in calls:
            kernel(*args)
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--programs", type=int, default=200)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels.BACKEND != "cython":
        print("compiled kernel not built; both columns use the pure-Python kernel")
    rng = random.Random(args.seed)
    small = [ground_text(random_program(rng, 6, 25)) for _ in range(args.programs)]
    large = [ground_text(random_program(rng, 18, 40)) for _ in range(args.programs // 10)]
    workloads = {
        f"{len(small)} programs, <=12 atoms": lambda: [solver.answer_sets(gp) for gp in small],
        f"{len(large)} programs, <=27 atoms": lambda: [solver.answer_sets(gp) for gp in large],
        "example planning task": lambda: execution_example_one(learned=True),
    }
    compiled = _kernels.enumerate_models
    print(f"{'workload':<30}{'calls':>6}{'compiled s':>12}{'python s':>12}{'speedup':>10}")
    for name, fn in workloads.items():
        calls = record(fn)
        fast = timed(compiled, calls, args.repeats)
        slow = timed(_search_py.enumerate_models, calls, args.repeats)
        print(f"{name:<30}{len(calls):>6}{fast:>12.4f}{slow:>12.4f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
