from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmflow.errors import (
    EnumerationBoundExceeded,
    IllConditioned,
    InputError,
    InsufficientSamples,
    NonpositiveLeadingCoefficient,
    NotPolynomial,
)
from mmflow.kstab import (
    AdiabaticResult,
    ExpansionData,
    adiabatic_expansion,
    adiabatic_verdict,
    df_from_oracle,
    df_invariant,
    fit_expansion,
    projective_weight_oracle,
)


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=4), st.integers(0, 8))
def test_oracle_matches_closed_forms(c, j):
    d = len(c) - 1
    dim, total = projective_weight_oracle(c, j)
    assert dim == comb(d + j, d)
    # each coordinate carries the same share j / (d + 1) of the exponents
    assert Fraction(total) == Fraction(sum(c) * j * dim, d + 1)


def test_oracle_bounds():
    with pytest.raises(EnumerationBoundExceeded):
        projective_weight_oracle([0] * 6, 2)
    with pytest.raises(EnumerationBoundExceeded):
        projective_weight_oracle([0, 1], 31)
    with pytest.raises(InputError):
        projective_weight_oracle([0], 2)


def test_p1_coefficients_and_df():
    res = df_from_oracle([0, 1], 1)
    assert res.coefficients == (1, 1, Fraction(1, 2), Fraction(1, 2))
    assert res.df == 0
    assert isinstance(res.df, Fraction)


def test_p2_coefficients_and_df():
    res = df_from_oracle([0, 0, 1], 2)
    assert res.coefficients == (Fraction(1, 2), Fraction(3, 2), Fraction(1, 6), Fraction(1, 2))
    assert res.df == 0


@pytest.mark.parametrize("s", range(-2, 3))
def test_df_shift_invariance(s):
    base = df_from_oracle([0, 1], 1).df
    assert df_from_oracle([s, 1 + s], 1).df == base
    base2 = df_from_oracle([0, 2, 5], 2).df
    assert df_from_oracle([s, 2 + s, 5 + s], 2).df == base2


@given(st.lists(st.integers(-4, 4), min_size=2, max_size=4))
def test_df_vanishes_for_projective_space(c):
    n = len(c) - 1
    assert df_from_oracle(c, n).df == 0


def test_fit_expansion_exact_and_holdout():
    data = ExpansionData(tuple((j, j**2 + 3 * j + 1) for j in range(1, 6)), 2)
    assert fit_expansion(data, 2) == (1, 3, 1)
    bad = ExpansionData(((1, 5), (2, 11), (3, 19), (4, 30)), 2)
    with pytest.raises(NotPolynomial):
        fit_expansion(bad, 2)
    with pytest.raises(InsufficientSamples):
        fit_expansion(ExpansionData(((1, 1), (2, 2)), 2), 2)


def test_expansion_data_validation():
    with pytest.raises(InputError):
        ExpansionData(((1, 1), (1, 2)), 1)
    with pytest.raises(InputError):
        ExpansionData(((0, 1),), 1)


def test_df_invariant_formula():
    assert df_invariant(1, 2, 3, 4) == Fraction(2 * 3 - 1 * 4, 1)
    assert df_invariant("1/2", 1, 0, 1) == Fraction(-1, 2) / Fraction(1, 4)
    with pytest.raises(NonpositiveLeadingCoefficient):
        df_invariant(0, 1, 1, 1)


def test_df_requires_matching_weights():
    with pytest.raises(InputError):
        df_from_oracle([0, 1, 2], 1)


def test_adiabatic_exact_two_term():
    ks = [10, 20, 40, 80, 160]
    res = adiabatic_expansion([(k, 2 + 3 / k) for k in ks])
    assert res.W0 == pytest.approx(2, abs=1e-9)
    assert res.W1 == pytest.approx(3, abs=1e-9)
    assert res.residual <= 1e-12


def test_adiabatic_with_quadratic_tail():
    ks = [10, 15, 20, 30, 50, 100]
    res = adiabatic_expansion([(k, 1 + 1 / k + 1 / k**2) for k in ks])
    assert res.W0 == pytest.approx(1, abs=1e-6)
    assert res.W1 == pytest.approx(1, abs=1e-6)
    assert res.c2 == pytest.approx(1, abs=1e-4)
    assert np.isfinite(res.residual)


def test_adiabatic_noisy_residual_reported(rng):
    ks = np.arange(10, 60, 5)
    noise = 1e-4 * rng.normal(size=ks.size)
    res = adiabatic_expansion(list(zip(ks, 0.5 - 2 / ks + noise)))
    assert 1e-6 < res.residual < 1e-3
    assert res.W0 == pytest.approx(0.5, abs=1e-2)


def test_adiabatic_input_errors():
    with pytest.raises(InsufficientSamples):
        adiabatic_expansion([(10, 1), (20, 1)])
    with pytest.raises(InputError):
        adiabatic_expansion([(5, 1), (20, 1), (30, 1)])
    with pytest.raises(InputError):
        adiabatic_expansion([(10, 1), (10, 1), (30, 1)])
    with pytest.raises(IllConditioned):
        adiabatic_expansion([(1e8, 1), (1e8 + 1, 1), (1e8 + 2, 1)])


def test_adiabatic_verdict_signs():
    assert adiabatic_verdict(AdiabaticResult(2.0, -5.0, 0.0))["semistable"]
    assert not adiabatic_verdict(AdiabaticResult(-1.0, 5.0, 0.0))["semistable"]
    v = adiabatic_verdict(AdiabaticResult(1e-12, -1.0, 0.0))
    assert v["W0_sign"] == 0 and not v["semistable"]
    v = adiabatic_verdict(AdiabaticResult(1e-3, 1.0, 1e-2))
    assert v["W0_sign"] == 0 and v["semistable"] and v["uncertainty"] == 1e-2
