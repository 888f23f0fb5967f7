"""Homophily estimands and the model-based estimation strategies.

The estimand is average ego-network composition for a group of interest:
the mean, over egos in the group, of the fraction of their neighbors in
the same group.  It can equivalently be written as a degree-weighted sum
over directed dyads, which is the form every estimator here works with.

Five strategies are provided: a model-free ratio over labeled dyads, two
node-level logistic models (with and without network features), a direct
dyad-level model, and the two-step ego-alter model (plain and augmented).
"""

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import (DegenerateLabelsError, EmptyTrainingSetError,
                     EstimandUndefinedError, InvalidParameterError)
from .glm import DesignMatrix, fit_logistic, predict
from .graph import Graph
from .sampling import GroundTruthMask
from .simgen import NodeTable

__all__ = ["ModelKind", "DenominatorMode", "DyadFrame", "EstimateRecord",
           "build_frame", "true_homophily", "build_design", "score_strategy",
           "estimate_homophily", "estimate_all_modes", "bias_decomposition",
           "coleman_numerator", "coleman_proportion", "coleman_index",
           "extended_homophily", "homophily_from_dyad_predictions",
           "node_probs_from_ego_predictions"]

_PROB_EPS = 1e-12


class ModelKind(str, Enum):
    NO_MODEL = "no_model"
    NODE_NO_NETWORK = "node_no_network"
    NODE = "node"
    DYAD = "dyad"
    EGO_ALTER = "ego_alter"
    EGO_ALTER_AUGMENTED = "ego_alter_augmented"


NODE_KINDS = (ModelKind.NODE_NO_NETWORK, ModelKind.NODE)
EGO_ALTER_KINDS = (ModelKind.EGO_ALTER, ModelKind.EGO_ALTER_AUGMENTED)


class DenominatorMode(str, Enum):
    ORACLE = "oracle"
    PLUG_IN = "plug_in"


@dataclass
class DyadFrame:
    """Column store with one row per directed dyad, aligned with Graph.dyads.

    ``weight`` is the per-dyad aggregation weight: 1/D_ego by default, or
    A_alter/D_ego when an action vector is supplied (extended estimand).
    """

    ego: np.ndarray
    alter: np.ndarray
    d_ego: np.ndarray
    d_alter: np.ndarray
    x_ego: np.ndarray
    x_alter: np.ndarray
    inv_d_ego: np.ndarray
    weight: np.ndarray
    y_ego: np.ndarray | None
    y_alter: np.ndarray | None
    y_aa: np.ndarray | None
    ego_labeled: np.ndarray | None = None
    alter_labeled: np.ndarray | None = None
    dyad_labeled: np.ndarray | None = None


@dataclass
class EstimateRecord:
    """One estimate: a (model, sampling, dgp, denominator mode) cell."""

    model: ModelKind
    sampling: str
    dgp: str
    denominator_mode: DenominatorMode
    h_true: float
    h_hat: float
    relative_error: float
    r1_hat: float | None = None
    r2_hat: float | None = None
    node_auc: float | None = None
    node_accuracy: float | None = None
    flag: str = ""
    n_labeled_nodes: int = 0
    n_labeled_dyads: int = 0
    rep: int = -1


def build_frame(g: Graph, nt: NodeTable, mask: GroundTruthMask | None = None,
                actions: np.ndarray | None = None) -> DyadFrame:
    """Assemble the per-dyad column store used by all dyad-level strategies."""
    ego, alter = g.dyad_ego, g.dyad_alter
    d_ego = g.degree[ego].astype(np.float64)
    inv_d = 1.0 / d_ego
    if actions is not None:
        actions = np.asarray(actions, dtype=np.float64)
        if np.any(actions < 0):
            raise InvalidParameterError("action counts must be nonnegative")
        weight = actions[alter] * inv_d
    else:
        weight = inv_d
    y = nt.y
    frame = DyadFrame(
        ego=ego, alter=alter, d_ego=d_ego,
        d_alter=g.degree[alter].astype(np.float64),
        x_ego=nt.x[ego], x_alter=nt.x[alter],
        inv_d_ego=inv_d, weight=weight,
        y_ego=None if y is None else y[ego].astype(np.float64),
        y_alter=None if y is None else y[alter].astype(np.float64),
        y_aa=None if y is None else (y[ego] * y[alter]).astype(np.float64),
    )
    if mask is not None:
        frame.ego_labeled = mask.node_mask[ego]
        frame.alter_labeled = mask.node_mask[alter]
        frame.dyad_labeled = mask.dyad_mask
    return frame


def true_homophily(g: Graph, nt_or_y) -> float:
    """Average ego-network composition for the group, from full labels.

    Computed both as a per-ego average and as a weighted dyad sum; the two
    forms are algebraically identical and asserted to agree to 1e-12.
    """
    y = nt_or_y.y if isinstance(nt_or_y, NodeTable) else np.asarray(nt_or_y)
    y = y.astype(np.float64)
    t = y.sum()
    if t == 0:
        raise EstimandUndefinedError("group of interest is empty")
    ego, alter = g.dyad_ego, g.dyad_alter
    # per-ego form: mean neighbor composition over group members
    frac = np.zeros(g.n)
    np.add.at(frac, ego, y[alter])
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(g.degree > 0, frac / np.maximum(g.degree, 1), 0.0)
    h_node = float((y * frac).sum() / t)
    # dyad form: degree-weighted sum over directed dyads
    h_dyad = float(np.sum((1.0 / g.degree[ego]) * y[ego] * y[alter]) / t)
    assert abs(h_node - h_dyad) < 1e-12
    return h_node


def _maybe_drop_constant(cols: list[tuple[str, np.ndarray]], drop: bool):
    if not drop:
        return cols
    return [(name, v) for name, v in cols if np.ptp(v) > 0.0]


def _assemble(cols, row_keys=None) -> DesignMatrix:
    names = ["intercept"] + [name for name, _ in cols]
    n_rows = cols[0][1].size if cols else (row_keys.shape[0] if row_keys is not None else 0)
    rows = np.column_stack([np.ones(n_rows)] + [v for _, v in cols])
    return DesignMatrix(rows=rows, col_names=names, row_keys=row_keys)


def node_design(g: Graph, nt: NodeTable, network: bool,
                drop_constant: bool = False) -> DesignMatrix:
    cols = [("x", nt.x)]
    if network:
        cols += [("inv_d", 1.0 / g.degree.astype(np.float64)),
                 ("d", g.degree.astype(np.float64))]
    return _assemble(_maybe_drop_constant(cols, drop_constant),
                     row_keys=np.arange(g.n))


def dyad_design(frame: DyadFrame, extra: tuple[str, np.ndarray] | None = None,
                drop_constant: bool = False) -> DesignMatrix:
    cols = [("x_ego", frame.x_ego), ("x_alter", frame.x_alter),
            ("w_ego", frame.weight), ("d_ego", frame.d_ego),
            ("d_alter", frame.d_alter)]
    cols = _maybe_drop_constant(cols, drop_constant)
    if extra is not None:
        cols.append(extra)
    return _assemble(cols, row_keys=np.column_stack([frame.ego, frame.alter]))


def build_design(kind: ModelKind, g: Graph, nt: NodeTable,
                 mask: GroundTruthMask, frame: DyadFrame | None = None,
                 role: str = "ego", drop_constant: bool = False):
    """Design matrix plus training-row selector for a strategy.

    For the ego-alter kinds ``role`` picks the submodel ("ego" or "alter");
    both share the same base columns but train on different rows.  The
    augmented alter design is completed inside score_strategy, where the
    ego predictions it needs become available.
    """
    kind = ModelKind(kind)
    if kind in NODE_KINDS:
        design = node_design(g, nt, network=(kind == ModelKind.NODE),
                             drop_constant=drop_constant)
        return design, mask.node_mask.copy()
    if frame is None:
        frame = build_frame(g, nt, mask)
    design = dyad_design(frame, drop_constant=drop_constant)
    if kind == ModelKind.DYAD:
        return design, mask.dyad_mask.copy()
    if kind in EGO_ALTER_KINDS:
        nodes = mask.node_mask
        train = nodes[frame.ego] if role == "ego" else nodes[frame.alter]
        return design, train
    raise InvalidParameterError(f"{kind} has no design matrix")


def _fit_predict(design: DesignMatrix, y: np.ndarray, train_mask: np.ndarray):
    """Fit on labeled rows, predict all rows.  Returns (probs, flag).

    Single-class training labels fall back to a flagged constant-probability
    model at the observed class rate.
    """
    if train_mask.sum() == 0:
        raise EmptyTrainingSetError("no labeled training rows")
    y_train = y[train_mask]
    try:
        model = fit_logistic(design.select(train_mask), y_train)
    except DegenerateLabelsError:
        rate = float(np.clip(y_train.mean(), _PROB_EPS, 1.0 - _PROB_EPS))
        return np.full(design.rows.shape[0], rate), "fallback"
    flag = "ridge" if model.ridge_used else ""
    return predict(model, design), flag


def node_probs_from_ego_predictions(g: Graph, ego_pred: np.ndarray) -> np.ndarray:
    """Collapse a per-dyad family of ego predictions to one probability per
    node by averaging over the node's dyads."""
    acc = np.zeros(g.n)
    np.add.at(acc, g.dyad_ego, ego_pred)
    return acc / g.degree


@dataclass
class ScoredStrategy:
    """Per-dyad predictions and bookkeeping for one fitted strategy."""

    kind: ModelKind
    dyad_pred: np.ndarray | None   # predicted Y_ij^aa per directed dyad
    node_probs: np.ndarray | None  # per-node probability, when the kind yields one
    plugin_denominator: float | None
    ego_pred: np.ndarray | None = None
    alter_pred: np.ndarray | None = None
    flag: str = ""
    ratio_h: float | None = None   # NO_MODEL only


def score_strategy(kind: ModelKind, g: Graph, nt: NodeTable,
                   mask: GroundTruthMask, frame: DyadFrame | None = None,
                   drop_constant: bool = False) -> ScoredStrategy:
    """Fit a strategy on the ground-truth mask and score the whole network."""
    kind = ModelKind(kind)
    if frame is None:
        frame = build_frame(g, nt, mask)

    if kind == ModelKind.NO_MODEL:
        lab = frame.dyad_labeled
        num = float(np.sum(frame.weight[lab] * frame.y_ego[lab] * frame.y_alter[lab]))
        den = float(np.sum(frame.inv_d_ego[lab] * frame.y_ego[lab]))
        if den == 0.0:
            raise EstimandUndefinedError("no labeled group members among dyads")
        return ScoredStrategy(kind=kind, dyad_pred=None, node_probs=None,
                              plugin_denominator=None, ratio_h=num / den)

    if kind in NODE_KINDS:
        design, train = build_design(kind, g, nt, mask, frame,
                                     drop_constant=drop_constant)
        p_node, flag = _fit_predict(design, nt.y.astype(np.float64), train)
        dyad_pred = p_node[frame.ego] * p_node[frame.alter]
        return ScoredStrategy(kind=kind, dyad_pred=dyad_pred, node_probs=p_node,
                              plugin_denominator=float(p_node.sum()), flag=flag)

    base = dyad_design(frame, drop_constant=drop_constant)

    if kind == ModelKind.DYAD:
        p_dyad, flag = _fit_predict(base, frame.y_aa, frame.dyad_labeled)
        # auxiliary ego-margin model backs the plug-in denominator
        p_margin, mflag = _fit_predict(base, frame.y_ego, frame.ego_labeled)
        plugin = float(np.sum(frame.inv_d_ego * p_margin))
        flag = ",".join(f for f in (flag, mflag) if f)
        return ScoredStrategy(kind=kind, dyad_pred=p_dyad, node_probs=None,
                              plugin_denominator=plugin, flag=flag)

    if kind in EGO_ALTER_KINDS:
        ego_pred, eflag = _fit_predict(base, frame.y_ego, frame.ego_labeled)
        if kind == ModelKind.EGO_ALTER_AUGMENTED:
            aug = dyad_design(frame, extra=("ego_pred", ego_pred),
                              drop_constant=drop_constant)
            alter_pred, aflag = _fit_predict(aug, frame.y_alter,
                                             frame.alter_labeled)
        else:
            alter_pred, aflag = _fit_predict(base, frame.y_alter,
                                             frame.alter_labeled)
        flag = ",".join(f for f in (eflag, aflag) if f)
        plugin = float(np.sum(frame.inv_d_ego * ego_pred))
        return ScoredStrategy(kind=kind, dyad_pred=ego_pred * alter_pred,
                              node_probs=node_probs_from_ego_predictions(g, ego_pred),
                              plugin_denominator=plugin,
                              ego_pred=ego_pred, alter_pred=alter_pred, flag=flag)

    raise InvalidParameterError(f"unknown model kind {kind}")


def homophily_from_dyad_predictions(frame: DyadFrame, dyad_pred: np.ndarray,
                                    denominator: float) -> float:
    """Weighted dyad-sum numerator divided by a group-size denominator."""
    if denominator == 0.0:
        raise EstimandUndefinedError("zero denominator")
    return float(np.sum(frame.weight * dyad_pred) / denominator)


def bias_decomposition(g: Graph, nt_or_y, ego_pred: np.ndarray,
                       alter_pred: np.ndarray) -> tuple[float, float]:
    """Oracle decomposition of ego-alter estimation error into two terms.

    R1 couples ego residuals with true alter outcomes; R2 couples ego
    predictions with alter residuals.  The identity
    ``h_hat = h_true - R1 - R2`` holds exactly.
    """
    y = nt_or_y.y if isinstance(nt_or_y, NodeTable) else np.asarray(nt_or_y)
    if y is None:
        raise EstimandUndefinedError("oracle labels required")
    y = y.astype(np.float64)
    t = y.sum()
    if t == 0:
        raise EstimandUndefinedError("group of interest is empty")
    ego, alter = g.dyad_ego, g.dyad_alter
    w = 1.0 / g.degree[ego]
    e_ego = y[ego] - ego_pred
    e_alter = y[alter] - alter_pred
    r1 = float(np.sum(w * e_ego * y[alter]) / t)
    r2 = float(np.sum(w * ego_pred * e_alter) / t)
    return r1, r2


def coleman_numerator(g: Graph, values) -> float:
    """Within-group tie count per group member (can exceed 1)."""
    v = np.asarray(values, dtype=np.float64)
    t = v.sum()
    if t == 0:
        raise EstimandUndefinedError("group of interest is empty")
    return float(np.sum(v[g.dyad_ego] * v[g.dyad_alter]) / t)


def coleman_proportion(g: Graph, values) -> float:
    """Proportion of group members' dyads that stay within the group."""
    v = np.asarray(values, dtype=np.float64)
    slots = float(np.sum(g.degree * v))
    if slots == 0:
        raise EstimandUndefinedError("group of interest is empty")
    return float(np.sum(v[g.dyad_ego] * v[g.dyad_alter]) / slots)


def coleman_index(g: Graph, values) -> float:
    """Coleman homophily index: within-group share versus its chance share.

    The chance share is the group's share of nodes, the classical Coleman
    baseline.
    """
    v = np.asarray(values, dtype=np.float64)
    s_a = coleman_proportion(g, v)
    w_a = float(v.mean())
    if s_a >= w_a:
        return (s_a - w_a) / (1.0 - w_a) if w_a < 1.0 else 1.0
    return (s_a - w_a) / w_a


def records_from_scored(kind, g, nt, mask, frame, scored, h_true,
                          sampling="", dgp="", rep=-1, node_metrics=None):
    """Build one EstimateRecord per denominator mode from a scored strategy."""
    kind = ModelKind(kind)
    t_true = float(nt.y.sum()) if nt.y is not None else None
    records = {}
    auc, acc = (None, None) if node_metrics is None else node_metrics
    r1 = r2 = None
    if scored.ego_pred is not None and nt.y is not None:
        r1, r2 = bias_decomposition(g, nt, scored.ego_pred, scored.alter_pred)
    for mode in DenominatorMode:
        if kind == ModelKind.NO_MODEL:
            h_hat = scored.ratio_h
        elif mode == DenominatorMode.ORACLE:
            if t_true is None:
                continue
            h_hat = homophily_from_dyad_predictions(frame, scored.dyad_pred, t_true)
        else:
            h_hat = homophily_from_dyad_predictions(frame, scored.dyad_pred,
                                                    scored.plugin_denominator)
        rel = (h_hat - h_true) / h_true if h_true not in (None, 0.0) else float("nan")
        records[mode] = EstimateRecord(
            model=kind, sampling=sampling, dgp=dgp, denominator_mode=mode,
            h_true=h_true, h_hat=h_hat, relative_error=rel,
            r1_hat=r1, r2_hat=r2, node_auc=auc, node_accuracy=acc,
            flag=scored.flag, n_labeled_nodes=mask.n_labeled_nodes,
            n_labeled_dyads=mask.n_labeled_dyads, rep=rep)
    return records


def estimate_all_modes(kind: ModelKind, g: Graph, nt: NodeTable,
                       mask: GroundTruthMask, actions=None,
                       sampling="", dgp="", rep=-1, node_metrics=None,
                       frame: DyadFrame | None = None, h_true=None,
                       drop_constant: bool = False):
    """Fit once, return {DenominatorMode: EstimateRecord} for both modes."""
    if frame is None:
        frame = build_frame(g, nt, mask, actions=actions)
    if h_true is None and nt.y is not None:
        if actions is None:
            h_true = true_homophily(g, nt)
        else:
            t = float(nt.y.sum())
            h_true = float(np.sum(frame.weight * frame.y_ego * frame.y_alter) / t)
    scored = score_strategy(kind, g, nt, mask, frame=frame,
                            drop_constant=drop_constant)
    return records_from_scored(kind, g, nt, mask, frame, scored, h_true,
                               sampling=sampling, dgp=dgp, rep=rep,
                               node_metrics=node_metrics)


def estimate_homophily(kind: ModelKind, g: Graph, nt: NodeTable,
                       mask: GroundTruthMask,
                       denominator_mode=DenominatorMode.ORACLE,
                       **kwargs) -> EstimateRecord:
    """Fit one strategy and return the estimate for a denominator mode."""
    mode = DenominatorMode(denominator_mode)
    return estimate_all_modes(kind, g, nt, mask, **kwargs)[mode]


def extended_homophily(g: Graph, nt: NodeTable, actions, kind: ModelKind,
                       mask: GroundTruthMask,
                       denominator_mode=DenominatorMode.ORACLE,
                       **kwargs) -> EstimateRecord:
    """Action-weighted estimand: A_alter/D_ego replaces 1/D_ego both as the
    aggregation weight and as the dyad-model degree feature."""
    return estimate_homophily(kind, g, nt, mask, denominator_mode,
                              actions=np.asarray(actions, dtype=np.float64),
                              **kwargs)
