import math

import numpy as np
import pytest

from twistcal import scenarios as sc
from twistcal.twisted import build_ambient_immersion, calibration_verdict

NAMES = sc.scenario_names()


def test_registry_contents():
    assert len(NAMES) == len(set(NAMES))
    for required in ("exp_associative", "exp_associative_ruled", "exp_associative_antiholo",
                     "flat_conormal_sl", "holograph_sl_harmonic", "holograph_sl_nonharmonic",
                     "borisenko_exact", "paraboloid_conormal_sl", "flat_coassociative",
                     "flat_coassociative_nonparallel", "graph_coassociative", "exp_cayley",
                     "exp_cayley_nonholo"):
        assert required in NAMES


def test_unknown_name_lists_registry():
    with pytest.raises(sc.UnknownScenarioError) as err:
        sc.get_scenario("nope")
    assert "exp_cayley" in str(err.value)


def test_scenarios_are_cached_and_immutable():
    a = sc.get_scenario("flat_conormal_sl")
    assert sc.get_scenario("flat_conormal_sl") is a
    with pytest.raises(Exception):
        a.expected = "FAIL"


@pytest.mark.parametrize("name", NAMES)
def test_expected_verdicts_with_clear_separation(name):
    s = sc.get_scenario(name)
    rep = calibration_verdict(s.spec, s.grid(), s.fibres(), tol=s.tolerance)
    assert rep.verdict == s.expected
    if s.expected == "FAIL":
        assert rep.max > 100 * s.tolerance


def test_fibre_samples_default():
    assert len(sc.get_scenario("exp_cayley").fibres()) == 9
    assert sc.scenario_fibre_samples(1) == [(-1.0,), (0.0,), (1.0,)]


def test_example_coords_at_origin():
    C, K = 0.8, -1.3
    pt = sc.exp_example_coords(0.0, 0.0, 0.0, C, K)
    # w1 = (0, 0, 1), w2 = (0, 1, 0), w3 = (-1, 0, 0) at the origin; alpha = C/2, beta = K/2
    assert np.allclose(pt, [-K / 2, C / 2, 0.0, 0.0, 0.0, 1.0, 0.0])


def test_example_omegas_orthonormal():
    w = sc.exp_graph_omegas(0.3, -0.7)
    assert np.allclose(w @ w.T, np.eye(3))


def test_ruled_example():
    for x, y, t in [(0.2, 0.1, 1.5), (-0.4, 0.3, -2.0)]:
        pt = sc.exp_example_coords(x, y, t, 0.0, 0.0)
        assert np.allclose(pt[:3], t * sc.exp_graph_omegas(x, y)[0])


def test_example_coords_match_ambient_map():
    amb = build_ambient_immersion(sc.exp_associative_spec(1.0, 1.0))
    for u in sc.get_scenario("exp_associative").grid():
        assert np.allclose(amb(u, (0.4,)), sc.exp_example_coords(u[0], u[1], 0.4, 1.0, 1.0),
                           atol=1e-10)


def test_printed_form_comparison_reports_gap():
    cmp = sc.printed_form_comparison()
    assert cmp["agrees"] is False
    assert cmp["origin_recipe_fibre"] == pytest.approx([-0.5, 0.5, 0.0])
    assert cmp["origin_printed_fibre"][1] == pytest.approx(0.75)
    # base coordinates agree
    assert cmp["max_gap_per_coordinate"][3:] == [0.0, 0.0, 0.0, 0.0]


def test_describe_scenarios():
    rows = sc.describe_scenarios()
    assert [r["name"] for r in rows] == NAMES
    assert all(r["expected"] in ("PASS", "FAIL") and r["note"] for r in rows)
