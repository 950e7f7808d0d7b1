"""Precision, recall and accuracy with an explicit convention for undecided outputs."""
from __future__ import annotations

from dataclasses import dataclass

UNDECIDED = "undecided"


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    accuracy: float
    precision_defined: bool
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    undecided: int = 0


def prf(tp: int, fp: int, fn: int) -> Scores:
    """Scores from raw counts; with no predictions precision is reported as 0 and flagged."""
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    predicted = tp + fp
    precision = tp / predicted if predicted else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    total = tp + fp + fn
    return Scores(precision, recall, tp / total if total else 0.0, predicted > 0, tp, fp, fn)


def metrics(predictions: dict, truth: dict, count_undecided: bool = True) -> Scores:
    """Binary scores for aligned id -> label maps.

    Predictions are ``True``, ``False`` or ``"undecided"``. An undecided
    output is always wrong for accuracy; it also enters the precision
    denominator unless ``count_undecided`` is false.
    """
    if set(predictions) != set(truth):
        raise ValueError("predictions and ground truth must cover the same ids")
    tp = fp = fn = tn = und = 0
    for k, t in truth.items():
        p = predictions[k]
        if p == UNDECIDED or p is None:
            und += 1
            if t:
                fn += 1
        elif p and t:
            tp += 1
        elif p:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    denom = tp + fp + (und if count_undecided else 0)
    n = len(truth)
    return Scores(
        precision=tp / denom if denom else 0.0,
        recall=tp / (tp + fn) if tp + fn else 0.0,
        accuracy=(tp + tn) / n if n else 0.0,
        precision_defined=denom > 0,
        tp=tp, fp=fp, fn=fn, tn=tn, undecided=und,
    )


def task_metrics(result, truth, count_undecided: bool = True) -> dict:
    """Per-task scores for a pipeline result against a scene's ground truth."""
    out = {}
    for task, oracle in (("occlusion", truth.occluded), ("stability", truth.stable)):
        preds = {t: d.value for (k, t), d in result.decisions.items() if k == task}
        out[task] = metrics(preds, {t: oracle[t] for t in preds}, count_undecided)
    return out
