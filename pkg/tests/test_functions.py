import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbcoeff.functions import (
    Basis,
    BasisMismatchError,
    CoefficientVector,
    FunctionSpec,
    admissibility_probe,
    convert_basis,
    evaluate,
    exact_coefficients,
    state_coefficients,
)


def test_eval_trivial():
    assert evaluate(FunctionSpec("exp"), 0) == 1
    assert evaluate(FunctionSpec("cos"), 0) == 1


def test_eval_coherent_closed_form():
    assert abs(evaluate(FunctionSpec.coherent(1.0), 1.0) - 1.6487212707001282) < 1e-15


def test_eval_series_horner():
    f = FunctionSpec.series([1, 2j, -3])
    z = 0.3 - 1.2j
    assert abs(evaluate(f, z) - (1 + 2j * z - 3 * z * z)) < 1e-14


def test_eval_vectorised():
    z = np.linspace(-1, 1, 5) + 0.5j
    np.testing.assert_allclose(evaluate(FunctionSpec("sin"), z), np.sin(z))


def test_exact_coefficients_tables():
    np.testing.assert_allclose(
        exact_coefficients(FunctionSpec("exp"), 4).values.real,
        [1, 1, 0.5, 0.16666667, 0.04166667], atol=5e-9)
    np.testing.assert_allclose(
        exact_coefficients(FunctionSpec("expi"), 3).values, [1, 1j, -0.5, -1j / 6], atol=1e-15)
    np.testing.assert_allclose(
        exact_coefficients(FunctionSpec("cos"), 4).values, [1, 0, -0.5, 0, 1 / 24], atol=1e-15)


def test_exact_is_monomial():
    assert exact_coefficients(FunctionSpec("sin"), 3).basis == Basis.MONOMIAL


def test_parity_exact_zeros():
    s = exact_coefficients(FunctionSpec("sin"), 20).values
    c = exact_coefficients(FunctionSpec("cos"), 20).values
    assert np.all(s[0::2] == 0)
    assert np.all(c[1::2] == 0)
    assert s[3] == -1 / 6 and c[4] == 1 / 24


@pytest.mark.parametrize("kind", ["exp", "expi", "sin", "cos", "coherent"])
def test_partial_sum_matches_eval(kind):
    f = FunctionSpec.coherent(0.7 - 0.2j) if kind == "coherent" else FunctionSpec(kind)
    N = 20
    a = exact_coefficients(f, N).values
    rng = np.random.default_rng(0)
    z = rng.uniform(0, 1, 50) * np.exp(2j * np.pi * rng.uniform(size=50))
    partial = np.polyval(a[::-1], z)
    # Lagrange bound for these functions on |z| <= 1: max|f^(N+1)| / (N+1)! <= e^2 / 21!
    bound = math.e**2 / math.factorial(N + 1)
    assert np.max(np.abs(evaluate(f, z) - partial)) <= 10 * bound + 1e-14


def test_series_spec_validation():
    with pytest.raises(ValueError):
        FunctionSpec.series([])
    with pytest.raises(ValueError):
        FunctionSpec.series([float("nan")])
    with pytest.raises(ValueError):
        FunctionSpec.coherent(complex("inf"))
    with pytest.raises(ValueError):
        FunctionSpec("tan")


def test_json_roundtrip():
    for f in [FunctionSpec("exp"), FunctionSpec.coherent(0.5 - 0.25j), FunctionSpec.series([1, 1j])]:
        assert FunctionSpec.from_json(f.to_json()) == f
    f = FunctionSpec.from_json('{"kind":"series","coeffs":[[1,0],[0,2]]}')
    assert f.coeffs == (1, 2j)
    assert FunctionSpec.from_json({"kind": "coherent", "alpha": [1, 2]}).alpha == 1 + 2j


def test_admissibility_examples():
    assert admissibility_probe(FunctionSpec("exp"), 8, 64).admissible
    rep = admissibility_probe(FunctionSpec.series([1]), 8, 64)
    assert rep.admissible and rep.max_ratio == 1.0 and rep.argmax_radius == 0.0
    rep = admissibility_probe(FunctionSpec.coherent(2.0), 8, 64)
    assert rep.admissible
    # closed form |f| e^{-r^2} = exp(2r - 2 - r^2) peaks at r = 1 with value e^{-1}
    assert abs(rep.max_ratio - math.exp(-1)) < 1e-2


def test_admissibility_flags_growth_inside_window():
    # e^{r - r^2} still increases for r < 1/2
    assert not admissibility_probe(FunctionSpec("exp"), 0.4, 16).admissible


def test_admissibility_arguments():
    with pytest.raises(ValueError):
        admissibility_probe(FunctionSpec("exp"), 0, 64)
    with pytest.raises(ValueError):
        admissibility_probe(FunctionSpec("exp"), 1, 4)


def test_convert_basis_examples():
    c = CoefficientVector([1, 1, 0.5], Basis.MONOMIAL)
    b = convert_basis(c, Basis.FOCK)
    assert b.basis == Basis.FOCK
    np.testing.assert_allclose(b.values, [1, 1, 0.5 * math.sqrt(2)], rtol=1e-15)
    z = convert_basis(CoefficientVector(np.zeros(5), Basis.MONOMIAL), Basis.FOCK)
    assert np.all(z.values == 0)


def test_convert_basis_coherent_amplitudes():
    alpha = 0.8 * cmath.exp(0.4j)
    b = convert_basis(exact_coefficients(FunctionSpec.coherent(alpha), 12), "fock").values
    expected = [math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n)) for n in range(13)]
    np.testing.assert_allclose(b, expected, rtol=1e-13)


def test_convert_basis_guard():
    with pytest.raises(OverflowError):
        convert_basis(CoefficientVector(np.ones(152), Basis.FOCK), Basis.MONOMIAL)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=101))
def test_convert_basis_roundtrip(vals):
    c = CoefficientVector(vals, Basis.FOCK)
    back = convert_basis(convert_basis(c, Basis.MONOMIAL), Basis.FOCK)
    np.testing.assert_allclose(back.values, c.values, rtol=1e-12, atol=0)


def test_norm_sq():
    c = CoefficientVector([3, 4j], Basis.FOCK)
    assert c.norm_sq == 25.0


def test_basis_mismatch_is_type_error():
    with pytest.raises(BasisMismatchError):
        CoefficientVector([1], Basis.MONOMIAL).require(Basis.FOCK)
    assert issubclass(BasisMismatchError, TypeError)


def test_state_coefficients_conventions():
    f = FunctionSpec("cos")
    d = state_coefficients(f, 4, "direct")
    assert d.basis == Basis.FOCK
    np.testing.assert_array_equal(d.values, exact_coefficients(f, 4).values)
    b = state_coefficients(f, 4, "bargmann")
    np.testing.assert_allclose(b.values[4], math.sqrt(24) / 24)
    with pytest.raises(ValueError):
        state_coefficients(f, 4, "other")
