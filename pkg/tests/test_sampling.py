import numpy as np
import pytest

from homophily.errors import CalibrationError, InvalidParameterError
from homophily.graph import from_edges, generate_pa_graph
from homophily.sampling import (biased_edge_sample, biased_node_sample,
                                calibrate_alpha, random_edge_sample,
                                random_node_sample, save_mask_csv)
from homophily.simgen import NodeTable, simulate_node_table


@pytest.fixture(scope="module")
def big_graph():
    return generate_pa_graph(4000, 5, 0.8, np.random.default_rng(1))


def _flat_table(g, rng):
    return NodeTable(x=rng.standard_normal(g.n), z=np.zeros(g.n))


def test_node_sample_count(big_graph, rng):
    mask = random_node_sample(big_graph, 0.20, rng)
    assert mask.n_labeled_nodes == 800


def test_node_sample_one_node_no_dyads(rng):
    g = from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    mask = random_node_sample(g, 0.2, rng)  # rounds to one node
    assert mask.n_labeled_nodes == 1
    assert mask.n_labeled_dyads == 0


def test_node_sample_all_but_one(rng):
    g = from_edges(10, [(i, i + 1) for i in range(9)])
    mask = random_node_sample(g, 0.9, rng)  # 9 of 10 nodes
    assert mask.n_labeled_nodes == 9
    left_out = int(np.flatnonzero(~mask.node_mask)[0])
    expected = [[e, a] for e, a in g.dyads.tolist()
                if e != left_out and a != left_out]
    assert g.dyads[mask.dyad_mask].tolist() == expected


def test_node_sample_fraction_validation(big_graph, rng):
    with pytest.raises(InvalidParameterError):
        random_node_sample(big_graph, 0.0, rng)
    with pytest.raises(InvalidParameterError):
        random_node_sample(big_graph, 1.0, rng)


def test_edge_sample_counts(big_graph, rng):
    mask = random_edge_sample(big_graph, 0.025, rng)
    assert mask.n_labeled_dyads == 2 * round(0.025 * big_graph.n_edges)
    # collisions on high-degree endpoints pull the distinct-node count
    # well below twice the edge count
    assert 680 <= mask.n_labeled_nodes <= 920


def test_edge_sample_single_edge(rng):
    g = from_edges(6, [(0, 1), (2, 3), (4, 5)])
    mask = random_edge_sample(g, 0.34, rng)  # rounds to one edge
    assert mask.n_labeled_nodes == 2
    assert mask.n_labeled_dyads == 2


def test_edge_sample_everything(rng):
    g = from_edges(6, [(0, 1), (2, 3), (4, 5)])
    mask = random_edge_sample(g, 0.999, rng)
    assert mask.n_labeled_dyads == 6
    assert mask.n_labeled_nodes == 6


def test_calibrate_alpha_symmetry():
    assert abs(calibrate_alpha(np.zeros(100), 50)) < 1e-8


def test_calibrate_alpha_quarter():
    alpha = calibrate_alpha(np.zeros(100), 25)
    assert np.isclose(alpha, np.log(1.0 / 3.0), atol=1e-8)


def test_calibrate_alpha_bad_target():
    with pytest.raises(CalibrationError):
        calibrate_alpha(np.zeros(10), 0)
    with pytest.raises(CalibrationError):
        calibrate_alpha(np.zeros(10), 10)


def test_biased_node_constant_covariates(rng):
    g = from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])  # 4-cycle, all deg 2
    nt = NodeTable(x=np.zeros(4), z=np.zeros(4))
    counts = [biased_node_sample(g, nt, 2, np.random.default_rng(s)
                                 ).n_labeled_nodes for s in range(2000)]
    # uniform inclusion probability 1/2 per node
    assert abs(np.mean(counts) - 2.0) < 0.1


def test_biased_node_oversamples_degree():
    diffs = []
    for s in range(100):
        r = np.random.default_rng(s)
        g = generate_pa_graph(300, 3, 0.8, r)
        nt = _flat_table(g, r)
        mask = biased_node_sample(g, nt, 60, r)
        diffs.append(g.degree[mask.node_mask].mean() - g.degree.mean())
    assert np.mean(diffs) > 0.5


def test_biased_node_hits_target(big_graph):
    r = np.random.default_rng(9)
    nt = _flat_table(big_graph, r)
    mask = biased_node_sample(big_graph, nt, 800, r)
    assert abs(mask.n_labeled_nodes - 800) <= 0.05 * 800


def test_biased_edge_constant_covariates(rng):
    g = from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    nt = NodeTable(x=np.zeros(4), z=np.zeros(4))
    counts = [np.count_nonzero(
        biased_edge_sample(g, nt, 2, np.random.default_rng(s)).dyad_mask) // 2
        for s in range(2000)]
    assert abs(np.mean(counts) - 2.0) < 0.1


def test_biased_edge_oversamples_degree():
    diffs = []
    for s in range(100):
        r = np.random.default_rng(1000 + s)
        g = generate_pa_graph(300, 3, 0.8, r)
        nt = _flat_table(g, r)
        mask = biased_edge_sample(g, nt, 30, r)
        lab = g.dyads[mask.dyad_mask]
        if lab.size:
            diffs.append(g.degree[lab].mean() - g.degree.mean())
    assert np.mean(diffs) > 1.0


def test_biased_edge_hits_target(big_graph):
    r = np.random.default_rng(10)
    nt = _flat_table(big_graph, r)
    target = round(0.025 * big_graph.n_edges)
    mask = biased_edge_sample(big_graph, nt, target, r)
    realized = mask.n_labeled_dyads // 2
    # Bernoulli draws around the calibrated mean: allow three standard
    # deviations (about 22 edges at this target)
    assert abs(realized - target) <= 3 * np.sqrt(target)


def test_mask_csv(tmp_path, rng):
    g = from_edges(4, [(0, 1), (1, 2)])
    nt = NodeTable(x=np.zeros(4), z=np.zeros(4))
    mask = random_edge_sample(g, 0.5, rng)
    node_path, dyad_path = tmp_path / "nodes.csv", tmp_path / "dyads.csv"
    save_mask_csv(g, mask, node_path, dyad_path)
    assert node_path.read_text().splitlines()[0] == "node_id"
    lines = dyad_path.read_text().splitlines()
    assert lines[0] == "src,dst"
    assert len(lines) - 1 == mask.n_labeled_dyads
