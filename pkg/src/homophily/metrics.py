"""Replication- and battery-level evaluation, plus the CV residual diagnostic."""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .errors import DegenerateLabelsError, EmptyTrainingSetError, InvalidParameterError
from .estimators import (DyadFrame, ModelKind, NODE_KINDS, _fit_predict,
                         dyad_design, node_design)
from .glm import DesignMatrix
from .sampling import GroundTruthMask

__all__ = ["bias_and_mae", "node_level_metrics", "cv_residual_diagnostic",
           "DiagnosticResult", "summarize_records"]


def bias_and_mae(records) -> tuple[float, float]:
    """Mean relative bias and mean absolute relative error over records."""
    if len(records) == 0:
        raise InvalidParameterError("no records to summarize")
    rel = np.array([r.relative_error for r in records], dtype=np.float64)
    return float(rel.mean()), float(np.abs(rel).mean())


def node_level_metrics(node_probs, node_labels) -> tuple[float, float]:
    """AUC (rank statistic, ties count one half) and accuracy at 0.5."""
    p = np.asarray(node_probs, dtype=np.float64)
    y = np.asarray(node_labels)
    pos = y == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("need both classes to compute AUC")
    ranks = rankdata(p)
    auc = (ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    accuracy = float(np.mean((p >= 0.5) == pos))
    return float(auc), accuracy


@dataclass
class DiagnosticResult:
    fold_sums: np.ndarray
    total: float
    null_low: float
    null_high: float
    flagged: bool
    n_folds: int
    n_labeled_dyads: int


def _fold_assignment(frame: DyadFrame, dyad_edge_index, folds, rng):
    """Assign labeled dyads to folds by undirected edge, so both orientations
    of an edge always share a fold."""
    lab = np.flatnonzero(frame.dyad_labeled)
    edge_ids = dyad_edge_index[lab]
    uniq = np.unique(edge_ids)
    if uniq.size < folds:
        raise EmptyTrainingSetError(
            f"only {uniq.size} labeled edges for {folds} folds")
    perm = rng.permutation(uniq.size)
    edge_fold = np.empty(uniq.size, dtype=np.int64)
    edge_fold[perm] = np.arange(uniq.size) % folds
    fold_of = dict(zip(uniq.tolist(), edge_fold.tolist()))
    return lab, np.array([fold_of[e] for e in edge_ids.tolist()])


def _diagnostic_design(kind: ModelKind, frame: DyadFrame) -> DesignMatrix:
    """Dyad-target design using the feature set of a strategy.  Node-level
    kinds contribute their ego features only."""
    kind = ModelKind(kind)
    if kind == ModelKind.NODE_NO_NETWORK:
        cols = np.column_stack([np.ones(frame.ego.size), frame.x_ego])
        return DesignMatrix(cols, ("intercept", "x_ego"))
    if kind == ModelKind.NODE:
        cols = np.column_stack([np.ones(frame.ego.size), frame.x_ego,
                                frame.inv_d_ego, frame.d_ego])
        return DesignMatrix(cols, ("intercept", "x_ego", "inv_d", "d"))
    return dyad_design(frame)


def cv_residual_diagnostic(frame: DyadFrame, dyad_edge_index, kind: ModelKind,
                           folds: int = 5, rng=None,
                           n_permutations: int = 200) -> DiagnosticResult:
    """Out-of-fold weighted residual sums over the labeled dyads.

    A dyad-target logistic model with the given strategy's features is fit
    round-robin over K folds of the labeled dyads; each fold is scored
    out-of-fold.  The total sum of residual/D_ego is compared against a
    permutation null (residuals re-paired to random labeled dyads) whose
    central 95% interval defines the flagging rule.
    """
    if folds < 2:
        raise InvalidParameterError("need at least 2 folds")
    if rng is None:
        rng = np.random.default_rng(0)
    design = _diagnostic_design(kind, frame)
    lab, fold_id = _fold_assignment(frame, dyad_edge_index, folds, rng)

    y = frame.y_aa
    residuals = np.empty(lab.size)
    fold_sums = np.zeros(folds)
    weights = frame.inv_d_ego[lab]
    for f in range(folds):
        in_fold = fold_id == f
        train_rows = np.zeros(frame.ego.size, dtype=bool)
        train_rows[lab[~in_fold]] = True
        if np.ptp(y[train_rows]) == 0:
            raise DegenerateLabelsError(f"fold {f}: single-class training labels")
        p_all, _ = _fit_predict(design, y, train_rows)
        e = y[lab[in_fold]] - p_all[lab[in_fold]]
        residuals[in_fold] = e
        fold_sums[f] = float(np.sum(e * weights[in_fold]))

    total = float(fold_sums.sum())
    null = np.empty(n_permutations)
    for b in range(n_permutations):
        null[b] = float(np.sum(rng.permutation(residuals) * weights))
    lo, hi = np.percentile(null, [2.5, 97.5])
    return DiagnosticResult(fold_sums=fold_sums, total=total,
                            null_low=float(lo), null_high=float(hi),
                            flagged=bool(total < lo or total > hi),
                            n_folds=folds, n_labeled_dyads=lab.size)


def summarize_records(records) -> pd.DataFrame:
    """Battery summary: one row per (sampling, dgp, model, denominator mode)."""
    rows = [{
        "sampling": r.sampling, "dgp": r.dgp, "model": r.model.value,
        "denominator_mode": r.denominator_mode.value,
        "rel_bias": r.relative_error,
        "abs_rel_error": abs(r.relative_error),
        "node_auc": np.nan if r.node_auc is None else r.node_auc,
        "node_accuracy": np.nan if r.node_accuracy is None else r.node_accuracy,
        "flagged": 1.0 if r.flag else 0.0,
    } for r in records]
    df = pd.DataFrame(rows)
    grouped = df.groupby(["sampling", "dgp", "model", "denominator_mode"],
                         sort=True)
    out = grouped.agg(
        bias=("rel_bias", "mean"),
        mae=("abs_rel_error", "mean"),
        mean_auc=("node_auc", "mean"),
        mean_accuracy=("node_accuracy", "mean"),
        n_reps=("rel_bias", "size"),
        flagged_fraction=("flagged", "mean"),
    ).reset_index()
    return out
