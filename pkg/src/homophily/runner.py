"""Monte-Carlo battery orchestration.

Each replication draws one graph, then for every data-generating process
and sampling level fits all requested strategies on the same data (paired
design).  Child seeds are derived deterministically from (base_seed,
replication, stream label), so results are identical regardless of worker
count or which models are enabled.
"""

import csv
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np
import yaml

from .errors import ConfigError, HomophilyError, SchemaError
from .estimators import (DenominatorMode, EstimateRecord, ModelKind,
                         build_frame, records_from_scored, score_strategy,
                         true_homophily)
from .graph import generate_pa_graph
from .metrics import node_level_metrics, summarize_records
from .sampling import (biased_edge_sample, biased_node_sample,
                       random_edge_sample, random_node_sample)
from .simgen import DgpKind, simulate_node_table

__all__ = ["ExperimentConfig", "run_battery", "load_config",
           "write_results_csv", "read_results_csv", "RESULTS_COLUMNS"]

ALL_MODELS = [k.value for k in ModelKind]
ALL_DGPS = [d.value for d in DgpKind]

RESULTS_COLUMNS = ["rep", "dgp", "sampling", "model", "denominator_mode",
                   "H_true", "H_hat", "rel_bias", "node_auc", "node_accuracy",
                   "n_labeled_nodes", "n_labeled_dyads", "flag"]


@dataclass
class ExperimentConfig:
    n_nodes: int = 4000
    m: int = 5
    k: float = 0.8
    node_fraction: float = 0.20
    edge_fraction: float = 0.025
    biased_node_target: int | None = None  # default: round(node_fraction * n)
    biased_edge_target: int | None = None  # default: round(edge_fraction * E)
    replications: int = 500
    base_seed: int = 20240
    dgps: list = field(default_factory=lambda: list(ALL_DGPS))
    samplings: list = field(default_factory=lambda: ["node", "edge"])
    models: list = field(default_factory=lambda: list(ALL_MODELS))
    denominator_modes: list = field(default_factory=lambda: ["oracle", "plug_in"])
    workers: int = 1
    z_transform: str = "zscore"

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        for name in ("node_fraction", "edge_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must be in (0, 1), got {v}")
        for d in self.dgps:
            if d not in ALL_DGPS:
                raise ConfigError(f"unknown dgp: {d}")
        for s in self.samplings:
            if s not in ("node", "edge"):
                raise ConfigError(f"unknown sampling level: {s}")
        for m in self.models:
            if m not in ALL_MODELS:
                raise ConfigError(f"unknown model: {m}")
        for dm in self.denominator_modes:
            if dm not in ("oracle", "plug_in"):
                raise ConfigError(f"unknown denominator mode: {dm}")
        if self.z_transform not in ("zscore", "quantile_normal"):
            raise ConfigError(f"unknown z_transform: {self.z_transform}")


def load_config(path) -> ExperimentConfig:
    """Read a YAML key-value config.  Unknown keys are rejected by name."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a key-value document")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown config key: {key}")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _stream_rng(base_seed: int, rep: int, label: str) -> np.random.Generator:
    # counter-based mix: adding models or dgps never perturbs other streams
    tag = zlib.crc32(label.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([base_seed, rep, tag]))


def _sample_mask(cfg, g, nt, dgp, sampling, rng):
    if dgp == DgpKind.SAMPLED.value:
        if sampling == "node":
            target = cfg.biased_node_target or int(round(cfg.node_fraction * g.n))
            return biased_node_sample(g, nt, target, rng)
        target = cfg.biased_edge_target or int(round(cfg.edge_fraction * g.n_edges))
        return biased_edge_sample(g, nt, target, rng)
    if sampling == "node":
        return random_node_sample(g, cfg.node_fraction, rng)
    return random_edge_sample(g, cfg.edge_fraction, rng)


def run_replication(cfg: ExperimentConfig, rep: int):
    """All records for one replication.  Returns (records, errors)."""
    records: list[EstimateRecord] = []
    errors: list[dict] = []
    g = generate_pa_graph(cfg.n_nodes, cfg.m, cfg.k,
                          _stream_rng(cfg.base_seed, rep, "graph"))
    wanted_modes = [DenominatorMode(m) for m in cfg.denominator_modes]
    for dgp in cfg.dgps:
        nt = simulate_node_table(g, DgpKind(dgp),
                                 _stream_rng(cfg.base_seed, rep, f"dgp:{dgp}"),
                                 z_transform=cfg.z_transform)
        h_true = true_homophily(g, nt)
        for sampling in cfg.samplings:
            mask = _sample_mask(cfg, g, nt, dgp, sampling,
                                _stream_rng(cfg.base_seed, rep,
                                            f"mask:{dgp}:{sampling}"))
            frame = build_frame(g, nt, mask)
            for model in cfg.models:
                kind = ModelKind(model)
                try:
                    scored = score_strategy(kind, g, nt, mask, frame=frame)
                    metrics = None
                    if scored.node_probs is not None:
                        metrics = node_level_metrics(scored.node_probs, nt.y)
                    both = records_from_scored(
                        kind, g, nt, mask, frame, scored, h_true,
                        sampling=sampling, dgp=dgp, rep=rep,
                        node_metrics=metrics)
                    for mode in wanted_modes:
                        records.append(both[mode])
                except HomophilyError as exc:
                    errors.append({"rep": rep, "dgp": dgp, "sampling": sampling,
                                   "model": model,
                                   "error": type(exc).__name__,
                                   "message": str(exc)})
    return records, errors


def _rep_worker(args):
    cfg_dict, rep = args
    cfg = ExperimentConfig(**cfg_dict)
    return run_replication(cfg, rep)


def run_battery(cfg: ExperimentConfig):
    """Run all replications; returns (records, errors, summary DataFrame)."""
    reps = range(cfg.replications)
    if cfg.workers and cfg.workers > 1:
        cfg_dict = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_rep_worker,
                                    [(cfg_dict, r) for r in reps],
                                    chunksize=1))
    else:
        results = [run_replication(cfg, r) for r in reps]
    records: list[EstimateRecord] = []
    errors: list[dict] = []
    for recs, errs in results:
        records.extend(recs)
        errors.extend(errs)
    records.sort(key=lambda r: (r.rep, r.dgp, r.sampling, r.model.value,
                                r.denominator_mode.value))
    summary = summarize_records(records) if records else None
    return records, errors, summary


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(RESULTS_COLUMNS) + "\n")
        for r in records:
            row = [r.rep, r.dgp, r.sampling, r.model.value,
                   r.denominator_mode.value, _fmt(r.h_true), _fmt(r.h_hat),
                   _fmt(r.relative_error), _fmt(r.node_auc),
                   _fmt(r.node_accuracy), r.n_labeled_nodes,
                   r.n_labeled_dyads, r.flag]
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v
                              for v in row) + "\n")


def read_results_csv(path):
    """Load a results CSV back into EstimateRecord objects."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_COLUMNS:
            raise SchemaError(
                f"results CSV columns {reader.fieldnames} do not match "
                f"expected {RESULTS_COLUMNS}")
        for row in reader:
            records.append(EstimateRecord(
                model=ModelKind(row["model"]),
                sampling=row["sampling"], dgp=row["dgp"],
                denominator_mode=DenominatorMode(row["denominator_mode"]),
                h_true=float(row["H_true"]), h_hat=float(row["H_hat"]),
                relative_error=float(row["rel_bias"]),
                node_auc=float(row["node_auc"]) if row["node_auc"] else None,
                node_accuracy=(float(row["node_accuracy"])
                               if row["node_accuracy"] else None),
                flag=row["flag"],
                n_labeled_nodes=int(row["n_labeled_nodes"]),
                n_labeled_dyads=int(row["n_labeled_dyads"]),
                rep=int(row["rep"])))
    if not records:
        raise SchemaError("results CSV contains no rows")
    return records
