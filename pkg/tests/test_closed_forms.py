import math

import pytest

from tourprod.closed_forms import catalogue, evaluate_expression, exact_value
from tourprod.montecarlo import estimate_tour
from tourprod.tours import Topology, TourSpec

# decimals as printed in the source tables; they are truncated, not rounded
PRINTED = {
    "mu[1,1]": 1.128379,
    "mu[1,2]": 1.435991,
    "mu[1,3]": 1.778095,
    "mu[1,4]": 2.215483,
    "nu[1,2]": 2.0,
    "nu[1,3]": 1.692568,
    "nu[1,4]": 2.530818,
    "mu[2,1]": 1.772453,
    "mu[2,2]": 3.341223,
    "nu[2,2]": 4.0,
    "mu[3,1]": 2.256758,
    "mu[3,2]": 5.307973,
    "mu[3,3]": 12.442385,
    "mu[3,4]": 29.174181,
    "nu[3,2]": 6.0,
}


def test_catalogue_covers_printed_values():
    assert sorted(e.spec.symbol for e in catalogue()) == sorted(PRINTED)


@pytest.mark.parametrize("entry", catalogue(), ids=lambda e: e.spec.symbol)
def test_entry_truncates_to_printed_decimal(entry):
    printed = PRINTED[entry.spec.symbol]
    assert printed <= entry.value < printed + 1e-6
    assert math.floor(entry.value * 1e6) == round(printed * 1e6)


def test_entries_are_evaluated_from_expressions():
    for e in catalogue():
        assert evaluate_expression(e.expression) == e.value


def test_mu32_example():
    entry = exact_value(TourSpec(3, 2))
    assert entry.expression == "2 + 6*sqrt(3)/pi"


@pytest.mark.parametrize("d", range(1, 9))
def test_closed_two_step_is_second_moment(d):
    assert exact_value(TourSpec(d, 2, Topology.CLOSED)).value == 2 * d


def test_derived_family_provenance():
    assert exact_value(TourSpec(5, 2, Topology.CLOSED)).provenance.startswith("derived")
    assert exact_value(TourSpec(2, 2, Topology.CLOSED)).provenance == "published"


@pytest.mark.parametrize(
    "spec",
    [
        TourSpec(2, 3),
        TourSpec(2, 3, Topology.CLOSED),
        TourSpec(3, 3, Topology.CLOSED),
        TourSpec(2, 4),
        TourSpec(2, 4, Topology.CLOSED),
        TourSpec(3, 4, Topology.CLOSED),
        TourSpec(1, 5),
    ],
)
def test_unknown_values_are_absent(spec):
    assert exact_value(spec) is None


def test_strictly_increasing_in_dimension_and_steps():
    mu = {(e.spec.d, e.spec.n): e.value for e in catalogue() if not e.spec.closed}
    for (d, n), v in mu.items():
        if (d + 1, n) in mu:
            assert mu[(d + 1, n)] > v
        if (d, n + 1) in mu:
            assert mu[(d, n + 1)] > v


@pytest.mark.parametrize(
    "expr", ["__import__('os')", "open('x')", "pi.real", "[1, 2]", "sqrt(x=2)", "lambda: 1"]
)
def test_expression_whitelist(expr):
    with pytest.raises((ValueError, SyntaxError)):
        evaluate_expression(expr)


def test_to_dict_fields():
    d = exact_value(TourSpec(1, 4, Topology.CLOSED)).to_dict()
    assert d["quantity"] == "nu[1,4]"
    assert d["spec"] == {"d": 1, "n": 4, "topology": "closed"}
    assert set(d) == {"quantity", "spec", "expression", "value", "provenance"}


@pytest.mark.parametrize("entry", catalogue(), ids=lambda e: e.spec.symbol)
def test_entry_agrees_with_monte_carlo(entry):
    est = estimate_tour(entry.spec, samples=10**6, seed=0)
    assert abs(est.value - entry.value) < 3 * est.stderr
