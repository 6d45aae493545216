"""Peierls links: unit modulus, exact flux per plaquette, gauge covariance."""

import numpy as np
import pytest

from cornergl.errors import DiscretizationError
from cornergl.gauge import (
    GaugeLinks,
    build_links,
    gauge_transform,
    plaquette_arguments,
    trivial_links,
)
from cornergl.geometry import make_sector, symmetric_potential
from cornergl.grid import build_grid, rectangle_grid, sector_grid


def test_symmetric_potential_values():
    A = symmetric_potential(np.array([[2.0, 4.0], [0.0, 0.0]]))
    assert np.allclose(A, [[-2.0, 1.0], [0.0, 0.0]])
    # unit curl by central differences
    eps = 1e-6
    pts = np.array([[0.3, -0.7], [1.1, 0.4]])
    dA2_dx = (symmetric_potential(pts + [eps, 0.0])[:, 1]
              - symmetric_potential(pts - [eps, 0.0])[:, 1]) / (2 * eps)
    dA1_dy = (symmetric_potential(pts + [0.0, eps])[:, 0]
              - symmetric_potential(pts - [0.0, eps])[:, 0]) / (2 * eps)
    assert np.allclose(dA2_dx - dA1_dy, 1.0, atol=1e-9)


def test_links_unit_modulus():
    geo = make_sector(np.pi / 2, 4.0, 0.2)
    g = sector_grid(geo)
    links = build_links(g, field_scale=2.7)
    assert np.max(np.abs(np.abs(links.phase) - 1.0)) < 1e-14


def test_gauge_links_validation():
    with pytest.raises(DiscretizationError):
        GaugeLinks(phase=np.array([1.1 + 0.0j]), field_scale=1.0)


def test_trivial_links():
    g = rectangle_grid((0.0, 0.0), (1.0, 1.0), 0.25)
    links = trivial_links(g)
    assert np.all(links.phase == 1.0)
    assert links.field_scale == 0.0
    assert np.all(plaquette_arguments(g, links) == 0.0)


def test_plaquette_uniform_field_box():
    h = 0.25
    b = 1.3
    g = rectangle_grid((0.0, 0.0), (2.0, 2.0), h)
    links = build_links(g, field_scale=b)
    args = plaquette_arguments(g, links)
    nx, ny = g.dims
    assert args.size == (nx - 1) * (ny - 1)
    assert np.max(np.abs(args + b * h * h)) < 1e-12


def test_plaquette_masked_domain():
    h = 0.2
    b = 0.9

    def inside(x, y):
        return x * x + y * y <= 4.0

    g = build_grid(inside, (-2.2, -2.2), (2.2, 2.2), h)
    links = build_links(g, field_scale=b)
    args = plaquette_arguments(g, links)
    m = g.mask
    cells = m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]
    assert args.size == int(cells.sum())
    assert np.max(np.abs(args + b * h * h)) < 1e-12


def test_gauge_transform_zero_chi():
    g = rectangle_grid((0.0, 0.0), (1.0, 1.0), 0.25)
    links = build_links(g, field_scale=1.0)
    rng = np.random.default_rng(0)
    w = rng.standard_normal(g.n_nodes) + 1j * rng.standard_normal(g.n_nodes)
    w2, links2 = gauge_transform(g, w, links, np.zeros(g.n_nodes))
    assert np.array_equal(w2, w)
    assert np.array_equal(links2.phase, links.phase)


def test_gauge_transform_preserves_differences():
    geo = make_sector(np.pi / 2, 3.0, 0.2)
    g = sector_grid(geo)
    links = build_links(g, field_scale=1.0)
    rng = np.random.default_rng(1)
    w = rng.standard_normal(g.n_nodes) + 1j * rng.standard_normal(g.n_nodes)
    e = g.edges()

    for chi in (lambda x, y: 0.3 * x - 1.7 * y + 0.2,
                rng.uniform(-np.pi, np.pi, g.n_nodes)):
        w2, links2 = gauge_transform(g, w, links, chi)
        d1 = w[e.node_b] - links.phase * w[e.node_a]
        d2 = w2[e.node_b] - links2.phase * w2[e.node_a]
        assert np.max(np.abs(np.abs(d2) - np.abs(d1))) < 1e-13
        assert np.max(np.abs(np.abs(w2) - np.abs(w))) < 1e-15


def test_gauge_transform_chi_length():
    g = rectangle_grid((0.0, 0.0), (1.0, 1.0), 0.25)
    links = trivial_links(g)
    with pytest.raises(DiscretizationError):
        gauge_transform(g, np.zeros(g.n_nodes, dtype=complex), links,
                        np.zeros(g.n_nodes + 3))
