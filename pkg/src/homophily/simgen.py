"""Node features and binary outcomes for the five simulation processes.

Each process draws an individual feature X_i ~ N(0, 1) and (except for the
independent process) a network feature Z_i built from neighbor values or
neighbor degrees and standardized.  Outcomes are Bernoulli with inverse-logit probabilities
p_i = sigmoid(2*X_i + Z_i).
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import expit, ndtri

from .errors import DegenerateInputError
from .graph import Graph

__all__ = ["DgpKind", "NodeTable", "standardize", "gen_features",
           "gen_outcomes", "simulate_node_table", "save_node_table_csv"]

_P_EPS = 1e-12


class DgpKind(str, Enum):
    INDEPENDENT = "independent"
    DEGREE = "degree"
    MAIN = "main"
    UNOBSERVED = "unobserved"
    SAMPLED = "sampled"  # same outcome process as MAIN; differs in sampling


@dataclass
class NodeTable:
    """Per-node simulation state.  Arrays all have length n."""

    x: np.ndarray
    z: np.ndarray
    z_latent: np.ndarray | None = None
    p: np.ndarray | None = None
    y: np.ndarray | None = None
    x_coef: float = 2.0
    z_coef: float = 1.0


def standardize(v, ddof: int = 0, method: str = "zscore") -> np.ndarray:
    """Transform a vector to mean 0, sd 1.

    method="zscore" is the plain z-score with population (denominator n)
    standard deviation; method="quantile_normal" maps ranks through the
    normal quantile function, then z-scores the result.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size < 2:
        raise DegenerateInputError("need at least 2 values to standardize")
    if method == "quantile_normal":
        ranks = np.argsort(np.argsort(v, kind="stable"), kind="stable")
        v = ndtri((ranks + 0.5) / v.size)
    sd = v.std(ddof=ddof)
    if sd == 0.0 or not np.isfinite(sd):
        raise DegenerateInputError("cannot standardize a constant vector")
    return (v - v.mean()) / sd


def _neighbor_reduce(g: Graph, values: np.ndarray, how: str) -> np.ndarray:
    if np.any(g.degree == 0):
        raise DegenerateInputError("isolated node: neighbor aggregate undefined")
    vals = values[g.dyad_alter]
    starts = g.indptr[:-1]
    if how == "max":
        return np.maximum.reduceat(vals, starts)
    if how == "mean":
        return np.add.reduceat(vals, starts) / g.degree
    raise ValueError(how)


def gen_features(g: Graph, dgp: DgpKind, rng: np.random.Generator,
                 z_transform: str = "zscore") -> NodeTable:
    """Draw X and construct the (standardized) network feature Z for a DGP."""
    dgp = DgpKind(dgp)
    x = rng.standard_normal(g.n)
    z_latent = None
    if dgp == DgpKind.INDEPENDENT:
        z = np.zeros(g.n)
    elif dgp == DgpKind.DEGREE:
        # mean neighbor degree: high-degree-neighbor nodes lean toward y=1
        z = standardize(_neighbor_reduce(g, g.degree.astype(np.float64), "mean"),
                        method=z_transform)
    elif dgp in (DgpKind.MAIN, DgpKind.SAMPLED):
        z = standardize(_neighbor_reduce(g, x, "max"), method=z_transform)
    elif dgp == DgpKind.UNOBSERVED:
        z_latent = rng.standard_normal(g.n)
        z = standardize(_neighbor_reduce(g, z_latent, "max"), method=z_transform)
    else:  # pragma: no cover
        raise ValueError(dgp)
    return NodeTable(x=x, z=z, z_latent=z_latent)


def gen_outcomes(nt: NodeTable, dgp: DgpKind,
                 rng: np.random.Generator) -> NodeTable:
    """Fill p_i = sigmoid(2*X_i + Z_i) and draw Y_i ~ Bernoulli(p_i) in place."""
    eta = nt.x_coef * nt.x + nt.z_coef * nt.z
    nt.p = np.clip(expit(eta), _P_EPS, 1.0 - _P_EPS)
    nt.y = (rng.random(nt.p.size) < nt.p).astype(np.int64)
    return nt


def simulate_node_table(g: Graph, dgp: DgpKind, rng: np.random.Generator,
                        z_transform: str = "zscore") -> NodeTable:
    """Features plus outcomes in one call."""
    return gen_outcomes(gen_features(g, dgp, rng, z_transform), dgp, rng)


def save_node_table_csv(nt: NodeTable, path, ground_truth=None) -> None:
    """Write node_id,x,z,p,y,is_ground_truth rows."""
    gt = np.zeros(nt.x.size, dtype=bool) if ground_truth is None else ground_truth
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node_id,x,z,p,y,is_ground_truth\n")
        for i in range(nt.x.size):
            p = "" if nt.p is None else repr(float(nt.p[i]))
            y = "" if nt.y is None else int(nt.y[i])
            fh.write(f"{i},{float(nt.x[i])!r},{float(nt.z[i])!r},"
                     f"{p},{y},{int(gt[i])}\n")
