import numpy as np
import pytest

from homophily.errors import EstimandUndefinedError
from homophily.estimators import (DenominatorMode, ModelKind,
                                  bias_decomposition, build_design,
                                  build_frame, coleman_index,
                                  coleman_numerator, coleman_proportion,
                                  estimate_all_modes, estimate_homophily,
                                  extended_homophily,
                                  homophily_from_dyad_predictions,
                                  node_probs_from_ego_predictions,
                                  score_strategy, true_homophily)
from homophily.graph import from_edges, generate_pa_graph
from homophily.sampling import (GroundTruthMask, SampleLevel, SampleMode,
                                random_edge_sample, random_node_sample)
from homophily.simgen import NodeTable, simulate_node_table
from tests.conftest import random_simple_graph


def full_mask(g):
    node_mask = np.ones(g.n, dtype=bool)
    return GroundTruthMask(node_mask=node_mask,
                           dyad_mask=np.ones(g.dyads.shape[0], dtype=bool),
                           level=SampleLevel.NODE, mode=SampleMode.RANDOM)


def test_true_homophily_path(path_aab):
    g, nt = path_aab
    assert np.isclose(true_homophily(g, nt), 0.75)


def test_true_homophily_all_in_group():
    g = from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert true_homophily(g, np.ones(4)) == 1.0


def test_true_homophily_empty_group_raises(path_aab):
    g, _ = path_aab
    with pytest.raises(EstimandUndefinedError):
        true_homophily(g, np.zeros(3))


def test_homophily_two_forms_agree(rng):
    # per-ego average and weighted dyad sum are the same quantity
    for _ in range(200):
        g = random_simple_graph(rng)
        y = (rng.random(g.n) < 0.6).astype(float)
        if y.sum() == 0:
            y[0] = 1.0
        ego, alter = g.dyad_ego, g.dyad_alter
        h_dyad = np.sum((1.0 / g.degree[ego]) * y[ego] * y[alter]) / y.sum()
        assert np.isclose(true_homophily(g, y), h_dyad, atol=1e-12)


def test_node_design_row():
    g = from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    nt = NodeTable(x=np.array([0.3, 0, 0, 0, 0]), z=np.zeros(5))
    from homophily.estimators import node_design
    d = node_design(g, nt, network=True)
    assert d.col_names == ("intercept", "x", "inv_d", "d")
    assert np.allclose(d.rows[0], [1.0, 0.3, 0.25, 4.0])


def test_dyad_design_row():
    g = from_edges(6, [(0, 1), (0, 2), (1, 2), (1, 3), (1, 4), (1, 5)])
    # dyad (0, 1): X_0=1, X_1=-1, D_0=2, D_1=5
    nt = NodeTable(x=np.array([1.0, -1.0, 0, 0, 0, 0]), z=np.zeros(6))
    frame = build_frame(g, nt)
    from homophily.estimators import dyad_design
    d = dyad_design(frame)
    assert d.col_names == ("intercept", "x_ego", "x_alter", "w_ego",
                           "d_ego", "d_alter")
    row = np.flatnonzero((frame.ego == 0) & (frame.alter == 1))[0]
    assert np.allclose(d.rows[row], [1.0, 1.0, -1.0, 0.5, 2.0, 5.0])


def test_ego_alter_training_rows_per_labeled_node():
    star = from_edges(8, [(0, j) for j in range(1, 8)])
    nt = NodeTable(x=np.zeros(8), z=np.zeros(8),
                   y=np.array([1, 0, 1, 0, 1, 0, 1, 0]))
    node_mask = np.zeros(8, dtype=bool)
    node_mask[0] = True  # only the degree-7 center is labeled
    mask = GroundTruthMask(node_mask=node_mask,
                           dyad_mask=np.zeros(14, dtype=bool),
                           level=SampleLevel.NODE, mode=SampleMode.RANDOM)
    frame = build_frame(star, nt, mask)
    _, train = build_design(ModelKind.EGO_ALTER, star, nt, mask, frame,
                            role="ego")
    assert train.sum() == 7


def test_perfect_predictions_recover_truth(medium_graph):
    nt = simulate_node_table(medium_graph, "main", np.random.default_rng(2))
    frame = build_frame(medium_graph, nt, full_mask(medium_graph))
    h = true_homophily(medium_graph, nt)
    h_hat = homophily_from_dyad_predictions(frame, frame.y_aa,
                                            float(nt.y.sum()))
    assert np.isclose(h_hat, h, atol=1e-12)


def test_no_model_fully_labeled_equals_truth(medium_graph):
    nt = simulate_node_table(medium_graph, "main", np.random.default_rng(2))
    scored = score_strategy(ModelKind.NO_MODEL, medium_graph, nt,
                            full_mask(medium_graph))
    assert np.isclose(scored.ratio_h, true_homophily(medium_graph, nt),
                      atol=1e-12)


def test_no_model_path(path_aab):
    g, nt = path_aab
    scored = score_strategy(ModelKind.NO_MODEL, g, nt, full_mask(g))
    assert np.isclose(scored.ratio_h, 0.75)


def test_no_model_needs_labeled_group_dyads(path_aab):
    g, nt = path_aab
    empty = GroundTruthMask(node_mask=np.zeros(3, dtype=bool),
                            dyad_mask=np.zeros(4, dtype=bool),
                            level=SampleLevel.NODE, mode=SampleMode.RANDOM)
    with pytest.raises(EstimandUndefinedError):
        score_strategy(ModelKind.NO_MODEL, g, nt, empty)


def test_bias_decomposition_zero_residuals(path_aab):
    g, nt = path_aab
    y = nt.y.astype(float)
    ego_pred = y[g.dyad_ego]
    alter_pred = y[g.dyad_alter]
    r1, r2 = bias_decomposition(g, nt, ego_pred, alter_pred)
    assert r1 == 0.0 and r2 == 0.0


def test_bias_decomposition_identity(rng):
    # estimate = truth - R1 - R2, exactly, for any predictions
    for _ in range(100):
        g = random_simple_graph(rng)
        y = (rng.random(g.n) < 0.5).astype(float)
        if y.sum() == 0:
            y[0] = 1.0
        n_dyads = g.dyads.shape[0]
        ego_pred = rng.random(n_dyads)
        alter_pred = rng.random(n_dyads)
        r1, r2 = bias_decomposition(g, y, ego_pred, alter_pred)
        w = 1.0 / g.degree[g.dyad_ego]
        h_hat = np.sum(w * ego_pred * alter_pred) / y.sum()
        h = true_homophily(g, y)
        assert abs(h_hat - (h - r1 - r2)) < 1e-10


def test_bias_terms_usually_align(medium_graph):
    same_sign = 0
    for s in range(20):
        nt = simulate_node_table(medium_graph, "main",
                                 np.random.default_rng(100 + s))
        mask = random_node_sample(medium_graph, 0.2,
                                  np.random.default_rng(200 + s))
        scored = score_strategy(ModelKind.EGO_ALTER, medium_graph, nt, mask)
        r1, r2 = bias_decomposition(medium_graph, nt, scored.ego_pred,
                                    scored.alter_pred)
        same_sign += int(np.sign(r1) == np.sign(r2))
    assert same_sign >= 12


def test_coleman_path(path_aab):
    g, nt = path_aab
    assert np.isclose(coleman_numerator(g, nt.y), 1.0)
    assert np.isclose(coleman_proportion(g, nt.y), 2.0 / 3.0)


def test_coleman_all_in_group():
    g = from_edges(4, [(0, 1), (1, 2), (2, 3)])
    y = np.ones(4)
    assert coleman_proportion(g, y) == 1.0
    assert coleman_index(g, y) == 1.0


def test_coleman_index_bounds(rng):
    for _ in range(50):
        g = random_simple_graph(rng)
        y = (rng.random(g.n) < 0.5).astype(float)
        if y.sum() in (0, g.n) or g.degree[y > 0].sum() == 0:
            continue
        assert -1.0 - 1e-12 <= coleman_index(g, y) <= 1.0 + 1e-12


def test_training_dyad_residuals_orthogonal_to_weight():
    # with 1/D_ego in the model, the weighted residual sum over the
    # training dyads is forced to zero by the fitting equations
    from homophily.glm import fit_logistic
    g = generate_pa_graph(500, 4, 0.8, np.random.default_rng(3))
    nt = simulate_node_table(g, "main", np.random.default_rng(4))
    mask = random_edge_sample(g, 0.1, np.random.default_rng(5))
    frame = build_frame(g, nt, mask)
    design, train = build_design(ModelKind.DYAD, g, nt, mask, frame)
    model = fit_logistic(design.select(train), frame.y_aa[train])
    assert not model.ridge_used
    w_col = design.col_names.index("w_ego")
    assert abs(np.sum(design.rows[train, w_col] * model.residual)) < 1e-6


def test_extended_unit_actions_reduce_to_plain(medium_graph):
    nt = simulate_node_table(medium_graph, "main", np.random.default_rng(6))
    mask = random_node_sample(medium_graph, 0.3, np.random.default_rng(7))
    plain = estimate_homophily(ModelKind.NODE, medium_graph, nt, mask)
    ext = extended_homophily(medium_graph, nt, np.ones(medium_graph.n),
                             ModelKind.NODE, mask)
    assert np.isclose(ext.h_hat, plain.h_hat, atol=1e-12)
    assert np.isclose(ext.h_true, plain.h_true, atol=1e-12)


def test_extended_estimand_path(path_aab):
    g, nt = path_aab
    frame = build_frame(g, nt, actions=np.array([0.0, 1.0, 3.0]))
    h_ext = np.sum(frame.weight * frame.y_ego * frame.y_alter) / nt.y.sum()
    assert np.isclose(h_ext, 0.5)


def test_extended_zero_actions(path_aab):
    g, nt = path_aab
    frame = build_frame(g, nt, actions=np.zeros(3))
    assert np.sum(frame.weight * frame.y_ego * frame.y_alter) == 0.0


def test_node_probs_from_ego_predictions(star4):
    n_dyads = star4.dyads.shape[0]
    pred = np.zeros(n_dyads)
    center_rows = star4.dyad_ego == 0
    pred[center_rows] = [0.2, 0.4, 0.6]
    pred[~center_rows] = 0.9
    probs = node_probs_from_ego_predictions(star4, pred)
    assert np.isclose(probs[0], 0.4)
    assert np.allclose(probs[1:], 0.9)


def test_estimate_all_modes_returns_both(medium_graph):
    nt = simulate_node_table(medium_graph, "main", np.random.default_rng(8))
    mask = random_node_sample(medium_graph, 0.3, np.random.default_rng(9))
    both = estimate_all_modes(ModelKind.NODE, medium_graph, nt, mask)
    assert set(both) == {DenominatorMode.ORACLE, DenominatorMode.PLUG_IN}
    oracle, plug = both[DenominatorMode.ORACLE], both[DenominatorMode.PLUG_IN]
    assert oracle.h_true == plug.h_true
    assert oracle.h_hat != plug.h_hat  # denominators differ
    for rec in (oracle, plug):
        assert np.isclose(rec.relative_error,
                          (rec.h_hat - rec.h_true) / rec.h_true)


def test_plug_in_denominator_close_to_group_size(medium_graph):
    nt = simulate_node_table(medium_graph, "main", np.random.default_rng(10))
    mask = random_node_sample(medium_graph, 0.3, np.random.default_rng(11))
    scored = score_strategy(ModelKind.NODE, medium_graph, nt, mask)
    t = nt.y.sum()
    assert abs(scored.plugin_denominator - t) < 0.2 * t


def test_single_class_training_falls_back(path_aab):
    g, nt = path_aab
    node_mask = np.array([True, True, False])  # both labeled nodes in group
    mask = GroundTruthMask(node_mask=node_mask,
                           dyad_mask=node_mask[g.dyad_ego]
                           & node_mask[g.dyad_alter],
                           level=SampleLevel.NODE, mode=SampleMode.RANDOM)
    scored = score_strategy(ModelKind.NODE_NO_NETWORK, g, nt, mask)
    assert scored.flag == "fallback"
    assert np.allclose(scored.node_probs, scored.node_probs[0])
