"""Command-line interface: simulate, estimate, diagnose, report.

External node ids may be arbitrary strings; they are mapped to dense
internal ids (numeric sort when every id parses as an integer, else
lexicographic), and the mapping is written alongside outputs when an
output directory is given.
"""

import argparse
import csv
import os
import sys

import numpy as np
import pandas as pd

from .errors import ConfigError, HomophilyError, SchemaError
from .estimators import (DenominatorMode, ModelKind, build_frame,
                         coleman_index, coleman_numerator, coleman_proportion,
                         homophily_from_dyad_predictions, score_strategy)
from .graph import from_edges
from .metrics import cv_residual_diagnostic
from .runner import (RESULTS_COLUMNS, load_config, run_battery,
                     write_results_csv)
from .sampling import GroundTruthMask, SampleLevel, SampleMode
from .simgen import NodeTable

MODEL_ORDER = ["no_model", "node_no_network", "node", "dyad",
               "ego_alter", "ego_alter_augmented"]


def _read_csv_rows(path, required):
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        for col in required:
            if col not in names:
                raise SchemaError(f"{path}: missing column {col!r}")
        return list(reader), names


def _load_network(edges_path):
    rows, _ = _read_csv_rows(edges_path, ["src", "dst"])
    raw = [(r["src"], r["dst"]) for r in rows]
    ids = sorted({u for e in raw for u in e},
                 key=lambda s: (0, int(s)) if s.lstrip("-").isdigit() else (1, s))
    index = {u: i for i, u in enumerate(ids)}
    edges = [(index[a], index[b]) for a, b in raw]
    return from_edges(len(ids), edges), ids, index


def _load_labels(labels_path, index, group):
    rows, names = _read_csv_rows(labels_path, ["node_id", "label"])
    n = len(index)
    y = np.zeros(n, dtype=np.int64)
    labeled = np.zeros(n, dtype=bool)
    x = np.zeros(n)
    has_x = "x" in names
    for r in rows:
        nid = r["node_id"]
        if nid not in index:
            raise SchemaError(f"label references unknown node id {nid!r}")
        i = index[nid]
        if has_x and r.get("x"):
            x[i] = float(r["x"])
        label = (r["label"] or "").strip()
        if label:
            labeled[i] = True
            y[i] = 1 if label == group else 0
    if labeled.sum() == 0:
        raise SchemaError("labels file contains no labeled nodes")
    if y[labeled].sum() == 0:
        raise SchemaError(f"no labeled node carries group label {group!r}")
    return y, labeled, (x if has_x else None)


def _load_actions(actions_path, index):
    rows, _ = _read_csv_rows(actions_path, ["node_id", "a"])
    a = np.zeros(len(index))
    for r in rows:
        nid = r["node_id"]
        if nid not in index:
            raise SchemaError(f"actions reference unknown node id {nid!r}")
        a[index[nid]] = float(r["a"])
    return a


def _build_estimation_inputs(args):
    g, ids, index = _load_network(args.edges)
    y, labeled, x = _load_labels(args.labels, index, args.group)
    nt = NodeTable(x=x if x is not None else np.zeros(g.n),
                   z=np.zeros(g.n), y=y)
    mask = GroundTruthMask(
        node_mask=labeled,
        dyad_mask=labeled[g.dyad_ego] & labeled[g.dyad_alter],
        level=SampleLevel.NODE, mode=SampleMode.RANDOM)
    return g, ids, nt, mask


def _write_id_map(out_dir, ids):
    path = os.path.join(out_dir, "node_id_map.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("external_id,internal_id\n")
        for i, u in enumerate(ids):
            fh.write(f"{u},{i}\n")


def cmd_simulate(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.base_seed = args.seed
    os.makedirs(args.out, exist_ok=True)
    records, errors, summary = run_battery(cfg)
    write_results_csv(records, os.path.join(args.out, "results.csv"))
    summary.to_csv(os.path.join(args.out, "summary.csv"), index=False)
    if errors:
        pd.DataFrame(errors).to_csv(os.path.join(args.out, "errors.csv"),
                                    index=False)
    print(f"wrote {len(records)} records "
          f"({len(errors)} failed cells) to {args.out}")
    return 0


def _estimate_one(kind, g, nt, mask, actions):
    frame = build_frame(g, nt, mask, actions=actions)
    scored = score_strategy(kind, g, nt, mask, frame=frame, drop_constant=True)
    if kind == ModelKind.NO_MODEL:
        h_hat = scored.ratio_h
    else:
        h_hat = homophily_from_dyad_predictions(frame, scored.dyad_pred,
                                                scored.plugin_denominator)
    if scored.node_probs is not None:
        v = scored.node_probs
    else:
        v = np.where(mask.node_mask, nt.y, 0.0)  # labeled members only
    return {"model": kind.value, "H_hat": h_hat,
            "coleman_numerator": coleman_numerator(g, v),
            "coleman_proportion": coleman_proportion(g, v),
            "coleman_index": coleman_index(g, v),
            "flag": scored.flag}


def cmd_estimate(args):
    g, ids, nt, mask = _build_estimation_inputs(args)
    actions = _load_actions(args.actions, {u: i for i, u in enumerate(ids)}) \
        if args.actions else None
    kinds = ([ModelKind.NODE, ModelKind.EGO_ALTER_AUGMENTED]
             if args.model == "both" else [ModelKind(args.model)])
    print(f"nodes={g.n} edges={g.n_edges} "
          f"labeled_nodes={mask.n_labeled_nodes} "
          f"labeled_dyads={mask.n_labeled_dyads} group={args.group}")
    for kind in kinds:
        res = _estimate_one(kind, g, nt, mask, actions)
        flag = f" flag={res['flag']}" if res["flag"] else ""
        print(f"{res['model']}: H_hat={res['H_hat']:.6f} "
              f"coleman_numerator={res['coleman_numerator']:.6f} "
              f"coleman_proportion={res['coleman_proportion']:.6f} "
              f"coleman_index={res['coleman_index']:.6f}{flag}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_id_map(args.out, ids)
    return 0


def cmd_diagnose(args):
    g, ids, nt, mask = _build_estimation_inputs(args)
    frame = build_frame(g, nt, mask)
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    res = cv_residual_diagnostic(frame, g.dyad_edge_index,
                                 ModelKind(args.model), folds=args.folds,
                                 rng=rng)
    for f, s in enumerate(res.fold_sums):
        print(f"fold {f}: weighted residual sum = {s:.6f}")
    verdict = "OUTSIDE" if res.flagged else "inside"
    print(f"total = {res.total:.6f}; permutation 95% interval = "
          f"[{res.null_low:.6f}, {res.null_high:.6f}] ({verdict} null interval)")
    return 0


def _pivot_marked(df, value_col):
    """Rows sampling x dgp, columns models; best (smallest magnitude) cell
    in each row marked with a trailing '*'."""
    table_rows = []
    for (sampling, dgp), sub in df.groupby(["sampling", "dgp"], sort=True):
        by_model = {m: v for m, v in zip(sub["model"], sub[value_col])}
        models = [m for m in MODEL_ORDER if m in by_model]
        modeled = [m for m in models if m != "no_model"] or models
        best = min(modeled, key=lambda m: abs(by_model[m]))
        row = {"sampling": sampling, "dgp": dgp}
        for m in models:
            cell = f"{by_model[m]:.4f}"
            if m == best:
                cell += "*"
            row[m] = cell
        table_rows.append(row)
    return pd.DataFrame(table_rows)


def cmd_report(args):
    try:
        df = pd.read_csv(args.results)
    except Exception as exc:
        raise SchemaError(f"cannot read results CSV: {exc}") from exc
    if list(df.columns) != RESULTS_COLUMNS:
        raise SchemaError(f"results CSV columns {list(df.columns)} do not "
                          f"match expected {RESULTS_COLUMNS}")
    os.makedirs(args.out, exist_ok=True)
    df["abs_rel_error"] = df["rel_bias"].abs()
    for mode, sub in df.groupby("denominator_mode"):
        cell = sub.groupby(["sampling", "dgp", "model"], as_index=False).agg(
            bias=("rel_bias", "mean"), mae=("abs_rel_error", "mean"),
            node_auc=("node_auc", "mean"))
        _pivot_marked(cell, "bias").to_csv(
            os.path.join(args.out, f"bias_table_{mode}.csv"), index=False)
        _pivot_marked(cell, "mae").to_csv(
            os.path.join(args.out, f"mae_table_{mode}.csv"), index=False)
        scatter = cell.dropna(subset=["node_auc"])[
            ["sampling", "dgp", "model", "node_auc", "bias"]]
        scatter.to_csv(os.path.join(args.out, f"auc_vs_bias_{mode}.csv"),
                       index=False)
    print(f"wrote report tables to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="homophily",
        description="Estimate network homophily from predicted node "
                    "attributes; run simulation batteries and diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte-Carlo battery")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate homophily on an edge list")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--model", default="both",
                   choices=MODEL_ORDER + ["both"])
    p.add_argument("--group", required=True)
    p.add_argument("--actions", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("diagnose", help="cross-validated residual diagnostic")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--model", default="dyad", choices=MODEL_ORDER[1:])
    p.add_argument("--group", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("report", help="format battery results into tables")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HomophilyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
