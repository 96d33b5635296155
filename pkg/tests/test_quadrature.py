"""Quadrature rules, tensor grids, and the node-file round trip."""

import numpy as np
import pytest

from mappedpce import (
    Beta,
    TableIngestionError,
    Uniform,
    export_nodes_csv,
    gauss_rule,
    identity_map,
    mapped_rule,
    read_nodes_csv,
    sausage9,
    tensor_rule,
    transform_density,
)

GL_X, GL_W = np.polynomial.legendre.leggauss(400)


def test_gauss_rule_basic_contract():
    rule = gauss_rule(Uniform(), 6)
    assert rule.size == 6
    assert not rule.mapped
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    assert abs(rule.weights.sum() - 1.0) < 1e-13
    assert np.array_equal(rule.source_nodes, rule.nodes)
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


def test_mapped_rule_identity_is_plain_rule():
    plain = gauss_rule(Beta(4.0, 4.0), 9)
    mapped = mapped_rule(Beta(4.0, 4.0), identity_map(), 9)
    assert np.array_equal(plain.nodes, mapped.nodes)
    assert np.array_equal(plain.weights, mapped.weights)
    assert not mapped.mapped


def test_mapped_rule_pushes_nodes_keeps_weights():
    g = sausage9()
    rule = mapped_rule(Uniform(), g, 8)
    assert rule.mapped
    assert np.array_equal(rule.nodes, g.forward(rule.source_nodes))
    base = gauss_rule(transform_density(Uniform(), g), 8)
    assert np.array_equal(rule.weights, base.weights)
    assert np.array_equal(rule.source_nodes, base.nodes)
    assert abs(rule.weights.sum() - 1.0) < 1e-13


def test_mapped_rule_integrates_against_original_density():
    # change of variables: sum w f(g(s)) approximates E[f(y)]
    rule = mapped_rule(Uniform(), sausage9(), 20)
    for k in (0, 2, 4, 6, 8):
        assert abs(np.sum(rule.weights * rule.nodes**k) - 1.0 / (k + 1)) < 1e-11


def test_tensor_grid_last_dimension_fastest():
    r1 = gauss_rule(Uniform(), 2)
    r2 = gauss_rule(Uniform(), 3)
    grid = tensor_rule([r1, r2])
    assert grid.size == 6
    assert grid.dimension == 2
    # first block shares the first node of dim 1 while dim 2 sweeps
    assert np.array_equal(grid.nodes[:3, 0], np.full(3, r1.nodes[0]))
    assert np.array_equal(grid.nodes[:3, 1], r2.nodes)
    assert np.array_equal(grid.nodes[3:, 1], r2.nodes)
    expect_w = np.outer(r1.weights, r2.weights).ravel()
    assert np.array_equal(grid.weights, expect_w)
    assert abs(grid.weights.sum() - 1.0) < 1e-13


def test_tensor_grid_mixed_maps():
    ra = mapped_rule(Uniform(), sausage9(), 3)
    rb = gauss_rule(Beta(4.0, 4.0), 2)
    grid = tensor_rule([ra, rb])
    assert grid.nodes.shape == (6, 2)
    assert grid.source_nodes.shape == (6, 2)
    # second dimension has identity source
    assert np.array_equal(grid.source_nodes[:, 1], grid.nodes[:, 1])
    assert not np.array_equal(grid.source_nodes[:, 0], grid.nodes[:, 0])


def test_export_and_read_round_trip(tmp_path):
    grid = tensor_rule([gauss_rule(Uniform(), 3), gauss_rule(Beta(4.0, 4.0), 3)])
    path = tmp_path / "grid.csv"
    export_nodes_csv(grid, path)
    indices, coords, weights = read_nodes_csv(path)
    assert np.array_equal(indices, np.arange(9))
    assert np.array_equal(coords, grid.nodes)
    assert np.array_equal(weights, grid.weights)
    header = path.read_text().splitlines()[0]
    assert header == "index,y1,y2,weight"


def test_read_nodes_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("index,y1\n0,0.0,0.5\n")
    with pytest.raises(TableIngestionError):
        read_nodes_csv(path)
    path.write_text("index,y1,weight\n0,notanumber,0.5\n")
    with pytest.raises(TableIngestionError):
        read_nodes_csv(path)


def test_rule_requires_positive_node_count():
    with pytest.raises(ValueError):
        gauss_rule(Uniform(), 0)
