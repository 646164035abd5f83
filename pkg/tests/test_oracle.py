import ast
import inspect

import numpy as np
import pytest

from vpwave import oracle
from vpwave.errors import BracketMiss, GridTouchesSingularity, InvalidParameters
from vpwave.oracle import (
    bessel_ode_residual,
    eigenvalue_search,
    kummer_ode_residual,
    standard_grid,
)
from vpwave.specfun import bessel_j0


def test_standard_grid():
    g = standard_grid()
    assert g.size == 2000 and g[0] == pytest.approx(1e-2) and g[-1] == pytest.approx(20.0)
    assert np.all(np.diff(g) > 0)


def test_bessel_residual_small(backend):
    report = bessel_ode_residual(1.0, np.linspace(0.1, 10.0, 400), h=1e-4)
    assert report.max_abs_residual <= 1e-6
    assert report.residuals.size == 398  # interior points only
    assert bessel_ode_residual(1.0).max_abs_residual <= 1e-6


def test_bessel_residual_detects_wrong_frequency():
    grid = np.linspace(0.1, 10.0, 400)
    report = bessel_ode_residual(1.01, grid, psi=lambda p: np.asarray(bessel_j0(p)))
    pts = report.grid
    expected = (1.01**2 - 1.0) * pts * bessel_j0(pts)
    assert np.allclose(report.residuals, expected, atol=1e-6)


def test_zero_solution():
    report = bessel_ode_residual(2.0, psi=lambda p: np.zeros_like(p))
    assert report.max_abs_residual == 0.0


@pytest.mark.parametrize("m,energy", [(0, 1.0), (1, 3.0), (2, 5.0), (3, 2.0)])
def test_kummer_residual_small(backend, m, energy):
    report = kummer_ode_residual(m, energy)
    assert report.max_abs_residual <= 1e-6
    start, end = report.boundary_decay
    assert abs(end) < abs(start)


def test_kummer_wrong_eigenvalue():
    report = kummer_ode_residual(1, 3.0, sqrt_a=3.0)
    assert report.max_abs_residual > 1e-2


@pytest.mark.parametrize("kind", ["bessel", "kummer"])
def test_second_order_convergence(kind):
    def run(h):
        if kind == "bessel":
            return bessel_ode_residual(1.0, h=h).max_abs_residual
        return kummer_ode_residual(1, 3.0, h=h).max_abs_residual

    ratio = run(1e-2) / run(5e-3)
    assert 3.8 <= ratio <= 4.2


def test_singularity_guard():
    with pytest.raises(GridTouchesSingularity):
        bessel_ode_residual(1.0, np.array([1e-6, 5e-5, 0.5, 1.0]), h=1e-4)
    with pytest.raises(GridTouchesSingularity):
        kummer_ode_residual(0, 1.0, np.array([1e-6, 1e-4, 0.5, 1.0]), h=1e-4)
    with pytest.raises(InvalidParameters):
        bessel_ode_residual(1.0, np.array([1.0, 0.5, 2.0]))
    with pytest.raises(InvalidParameters):
        kummer_ode_residual(0, -1.0)


@pytest.mark.parametrize("m,energy,expected", [(0, 1.0, 1.0), (1, 1.0, 1 / 9), (2, 5.0, 1.0)])
def test_eigenvalue_search_examples(backend, m, energy, expected):
    assert eigenvalue_search(m, energy) == pytest.approx(expected, rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("m", range(6))
def test_eigenvalue_search_all_orders(m):
    for energy in (0.5, 1.0, 2.0, 5.0):
        assert eigenvalue_search(m, energy) == pytest.approx(energy**2 / (1 + 2 * m) ** 2, rel=1e-6)


def test_eigenvalue_search_bracket_miss(monkeypatch):
    monkeypatch.setattr(oracle, "SCAN_STEP", 50.0)
    with pytest.raises(BracketMiss):
        eigenvalue_search(1, 1.0)


def test_oracle_does_not_import_fitting():
    tree = ast.parse(inspect.getsource(oracle))
    names = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom):
            names.add(node.module)
        elif isinstance(node, ast.Import):
            names.update(a.name for a in node.names)
    assert not any(n and "fitting" in n for n in names)


def test_report_json():
    data = kummer_ode_residual(0, 1.0).to_json_dict()
    assert data["schema_version"] == 1 and len(data["grid"]) == len(data["residuals"])
