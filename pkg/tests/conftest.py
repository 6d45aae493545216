"""Shared session fixtures.

Everything expensive lives here: the half-plane edge constant, wedge
eigenvalues, mu sweeps, and the polygon minimizations.  Acceptance tests
and module tests read the same objects, so each heavy computation runs
once per pytest session.
"""

import numpy as np
import pytest

from cornergl import sector, spectral
from cornergl.cli import load_polygon
from cornergl.eigen import smallest_eigenpair
from cornergl.gauge import build_links
from cornergl.glsolver import (
    _VERTEX_CACHE,
    _angle_key,
    minimize_gl,
    run_params,
    verify_concentration,
)
from cornergl.grid import ghost_nodes, rectangle_grid
from cornergl.operators import assemble_kinetic_form
from cornergl.spectral import check_corner_assumption

PI = np.pi


@pytest.fixture(scope="session")
def square():
    return load_polygon("square")


@pytest.fixture(scope="session")
def triangle():
    return load_polygon("triangle")


@pytest.fixture(scope="session")
def pentagon():
    return load_polygon("pentagon")


@pytest.fixture(scope="session")
def theta0_default():
    return spectral.theta0()


@pytest.fixture(scope="session")
def assumption_square(square, theta0_default):
    return check_corner_assumption(square, cache=_VERTEX_CACHE)


@pytest.fixture(scope="session")
def assumption_triangle(triangle, theta0_default):
    return check_corner_assumption(triangle, cache=_VERTEX_CACHE)


@pytest.fixture(scope="session")
def assumption_pentagon(pentagon, theta0_default):
    return check_corner_assumption(pentagon, cache=_VERTEX_CACHE)


@pytest.fixture(scope="session")
def mu1_pi2(assumption_square):
    return _VERTEX_CACHE[_angle_key(PI / 2)]


@pytest.fixture(scope="session")
def mu1_pi3(assumption_triangle, triangle):
    return _VERTEX_CACHE[_angle_key(float(triangle.angles[0]))]


@pytest.fixture(scope="session")
def mu_star(theta0_default, mu1_pi2):
    return 0.5 * (mu1_pi2.extrapolated + theta0_default.extrapolated)


@pytest.fixture(scope="session")
def sweep_pi2():
    # Default mu grid at default wedge resolution.
    return sector.mu_sweep(PI / 2)


@pytest.fixture(scope="session")
def sweep_pi3(triangle):
    return sector.mu_sweep(float(triangle.angles[0]))


@pytest.fixture(scope="session")
def star_grid(mu_star):
    return mu_star + 0.01 * np.arange(-2, 3)


@pytest.fixture(scope="session")
def star_sweep_pi2(star_grid):
    return sector.mu_sweep(PI / 2, star_grid)


@pytest.fixture(scope="session")
def star_sweep_pi3(star_grid, triangle):
    return sector.mu_sweep(float(triangle.angles[0]), star_grid)


@pytest.fixture(scope="session")
def sector_lib(star_sweep_pi2, star_sweep_pi3, mu_star, triangle):
    return {
        _angle_key(PI / 2): star_sweep_pi2.solution_at(mu_star),
        _angle_key(float(triangle.angles[0])): star_sweep_pi3.solution_at(mu_star),
    }


@pytest.fixture(scope="session")
def sector_star(sector_lib):
    return sector_lib[_angle_key(PI / 2)]


@pytest.fixture(scope="session")
def gl_square_15(square, mu_star, sector_lib, assumption_square):
    return minimize_gl(
        square,
        run_params(15.0, mu_star),
        sector_solutions=sector_lib,
        assumption=assumption_square,
    )


@pytest.fixture(scope="session")
def gl_square_25(square, mu_star, sector_lib, assumption_square):
    return minimize_gl(
        square,
        run_params(25.0, mu_star),
        sector_solutions=sector_lib,
        assumption=assumption_square,
    )


@pytest.fixture(scope="session")
def gl_square_40(square, mu_star, sector_lib, assumption_square):
    return minimize_gl(
        square,
        run_params(40.0, mu_star),
        sector_solutions=sector_lib,
        assumption=assumption_square,
    )


@pytest.fixture(scope="session")
def gl_square_15_half(square, mu_star, sector_lib, assumption_square):
    base = run_params(15.0, mu_star)
    return minimize_gl(
        square,
        run_params(15.0, mu_star, step=base.step / 2),
        sector_solutions=sector_lib,
        assumption=assumption_square,
    )


@pytest.fixture(scope="session")
def gl_triangle_25(triangle, mu_star, sector_lib, assumption_triangle):
    return minimize_gl(
        triangle,
        run_params(25.0, mu_star),
        sector_solutions=sector_lib,
        assumption=assumption_triangle,
    )


@pytest.fixture(scope="session")
def concentration_square(
    square,
    mu_star,
    sector_lib,
    star_sweep_pi2,
    gl_square_15,
    gl_square_25,
    gl_square_40,
    assumption_square,
):
    return verify_concentration(
        square,
        [15.0, 25.0, 40.0],
        mu_star,
        sector_solutions=sector_lib,
        sweeps={_angle_key(PI / 2): star_sweep_pi2},
        solutions={15.0: gl_square_15, 25.0: gl_square_25, 40.0: gl_square_40},
        assumption=assumption_square,
    )


@pytest.fixture(scope="session")
def truncation_pair():
    # same step, doubled truncation radius: isolates the truncation error
    a = sector.minimize_sector(0.55, PI / 2, radius=28.0, step=0.2)
    b = sector.minimize_sector(0.55, PI / 2, radius=56.0, step=0.2)
    return a, b


@pytest.fixture(scope="session")
def landau_pair():
    # Unit-field Dirichlet box, large enough that wall effects sit far
    # below the discretization error at these steps.
    out = []
    for h in (1 / 32, 1 / 64):
        grid = rectangle_grid((-5.0, -5.0), (5.0, 5.0), h)
        links = build_links(grid, field_scale=1.0)
        form = assemble_kinetic_form(grid, links, ghosts=ghost_nodes(grid))
        lam, _ = smallest_eigenpair(form, grid.quad_weights(), tol=1e-8, seed=0)
        out.append(lam)
    return tuple(out)
