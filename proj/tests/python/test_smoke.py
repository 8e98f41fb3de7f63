import math

import pytest

import ncmin

ORACLE = """
problem:
  domain: {kind: interval, cells: 256}
  coefficient: zero
  datum: {id: constant, params: {value: 1}}
  solver: {tol: 1.0e-11}
"""


def closed_form(x):
    c = 1.0 / (2.0 * math.sqrt(2.0))
    return 1.0 - math.cosh((x - 0.5) / math.sqrt(2.0)) / math.cosh(c)


def test_grid_and_field():
    g = ncmin.interval_grid(0.0, 1.0, 4)
    assert g.num_nodes == 5
    assert g.num_interior == 3
    f = ncmin.interpolate(g, lambda x: x)
    assert f.values == pytest.approx([0.0, 0.25, 0.5, 0.75, 0.0])
    assert f.truncate(0.3).values == pytest.approx([0.0, 0.25, 0.3, 0.3, 0.0])
    assert f.tail(0.3).values == pytest.approx([0.0, 0.0, 0.2, 0.45, 0.0])
    assert f.norm("Linf") == pytest.approx(0.75)
    sq = ncmin.rect_grid(2, 2)
    assert sq.num_elements == 8


def test_solve_matches_closed_form():
    res = ncmin.solve(ORACLE)
    assert res["converged"]
    worst = max(abs(v - closed_form(p[0])) for p, v in zip(res["nodes"], res["values"]))
    assert worst < 1e-6


def test_audit_and_run(tmp_path):
    rep = ncmin.audit("problem: {domain: {kind: interval, cells: 32}, datum: sine}\n"
                      "audit: {minimality_samples: 10, coercivity_fields: 10}\n")
    assert rep["all_hard_pass"]
    assert "TERZASTIMA" in rep["estimates"]
    code, log = ncmin.run("", "certify", str(tmp_path))
    assert code == 0
    assert (tmp_path / "certify.csv").exists()
    assert "certify" in log


def test_counterexample_and_certify():
    rep = ncmin.divergence_report(3, 0.25, 12)
    assert len(rep["rows"]) == 13
    assert rep["log_h1_limit"] == pytest.approx(math.pi / 2)
    for name in ("quadratic", "anisotropic", "logaug"):
        assert ncmin.certify(name, samples=200, seed=1)["passed"]


def test_config_errors():
    with pytest.raises(ncmin.ConfigError):
        ncmin.echo_config("counterexample: {rho: 0.6}\n")
    with pytest.raises(ValueError):
        ncmin.echo_config("unknown_key: 1\n")
    text = ncmin.echo_config(ORACLE)
    assert ncmin.echo_config(text) == text
