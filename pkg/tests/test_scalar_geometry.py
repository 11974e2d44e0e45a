from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minitwistor.errors import CommonComponent, DegenerateInput, ModeMismatch, NotRealPoint
from minitwistor.scalar_geometry import (ProjPoint, QuadricForm, Scalar, apply_real_structure, complexify, det5,
                                         fit_quadratic_form, intersect_conics, kernel, proj_equal, real_form,
                                         solve_poly, to_exact)


def test_scalar_modes_do_not_mix():
    with pytest.raises(ModeMismatch):
        Scalar(Fraction(1, 2), "exact") + Scalar(0.5, "approx")
    assert (Scalar(Fraction(1, 3), "exact") * 3).value == 1


def test_approx_zero_needs_tolerance():
    with pytest.raises(TypeError):
        Scalar(1e-20, "approx").is_zero()
    assert Scalar(1e-20, "approx").is_zero(1e-12)


def test_to_exact_refuses_floats():
    with pytest.raises(ModeMismatch):
        to_exact(0.1)
    assert to_exact("3/7") == Fraction(3, 7)


def test_zero_vector_rejected():
    with pytest.raises(DegenerateInput):
        ProjPoint((0, 0, 0), "approx")


def test_exact_projective_equality_is_cross_multiplication():
    a = ProjPoint((1, 2, 3), "exact")
    b = ProjPoint((Fraction(1, 2), 1, Fraction(3, 2)), "exact")
    assert a == b
    assert not proj_equal((1, 2, 3), (1, 2, 4), exact=True)


def test_real_structure_is_an_involution():
    p = ProjPoint((1 + 2j, 3 - 1j, 0.5, 1j, 2), "approx")
    assert apply_real_structure(apply_real_structure(p)) == p


def test_real_form_round_trip():
    w = np.array([0.3, -1.2, 1.0, 0.4, 2.0])
    assert np.allclose(real_form(complexify(w)), w)


def test_real_form_of_non_real_point():
    with pytest.raises(NotRealPoint):
        real_form(ProjPoint((1, 2, 1, 1, 1j), "approx"))


def test_solve_poly_multiplicities():
    roots = solve_poly(np.poly([1.0, 1.0, -2.0]), cluster_tol=1e-6)
    assert sorted((round(r.real, 6), m) for r, m in roots) == [(-2.0, 1), (1.0, 2)]


def test_solve_poly_exact_factors():
    res = solve_poly([1, 0, -2, 0], mode="exact")  # x^3 - 2x
    assert res.roots == ((Fraction(0), 1),)
    assert res.residual_factors[0][0] == (1, 0, -2)


def test_kernel_exact():
    ker = kernel([[Fraction(1), Fraction(1), Fraction(0)], [Fraction(0), Fraction(0), Fraction(1)]])
    assert len(ker) == 1 and ker[0][0] == -ker[0][1]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_quadratic_fit_recovers_forms(c):
    g = np.array([[c[0], c[1], c[2]], [c[1], c[3], c[4]], [c[2], c[4], c[5]]])
    rng = np.random.default_rng(1)
    d = rng.normal(size=(12, 3))
    fit, rel = fit_quadratic_form(d, np.einsum("ki,ij,kj->k", d, g, d))
    assert np.allclose(fit, g, atol=1e-9)


def test_quadric_restriction():
    q = QuadricForm([[1, 0, 0], [0, -1, 0], [0, 0, 2]], "approx")
    e = np.eye(3)[:, :2]
    assert np.allclose(q.restrict(e), [[1, 0], [0, -1]])
    assert q.evaluate((1, 1, 0)) == 0


@pytest.mark.parametrize("z,w", [
    ((3, 3, 1, 0, 1), (3, 0, 1, 0, 1)),
    ((2 * np.exp(0.7j), 2 * np.exp(-0.7j), 1, 0, 1), (2 * np.cos(0.7), 2 * np.sin(0.7), 1, 0, 1)),
])
def test_real_form_examples(z, w):
    assert np.allclose(real_form(ProjPoint(z, "approx")), w, atol=1e-12)


def test_real_form_of_non_conjugate_pair():
    with pytest.raises(NotRealPoint):
        real_form(ProjPoint((1, 2, 0, 0, 1), "approx"))


def test_real_structure_squares_to_identity_on_many_points():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(1000, 5)) + 1j * rng.normal(size=(1000, 5))
    for z in pts:
        p = ProjPoint(tuple(z), "approx")
        back = apply_real_structure(apply_real_structure(p)).array()
        assert np.max(np.abs(back - p.array())) <= 1e-12 * np.max(np.abs(z))


def test_det5_and_quadratic_roots():
    assert det5(np.eye(5)) == 1.0
    assert det5([[Fraction(int(i == j)) for j in range(5)] for i in range(5)]) == 1
    assert sorted(r.real for r, _ in solve_poly([1, 0, -1])) == pytest.approx([-1.0, 1.0])


def _sym(d):
    m = np.zeros((3, 3))
    for (i, j), c in d.items():
        m[i, j] += c / 2
        m[j, i] += c / 2
    return m


def _points(res):
    out = {}
    for p, m in res:
        a = p.array()
        a = a / a[np.argmax(np.abs(a))]
        out[tuple(np.round(a.real, 9) + 0.0)] = m
    return out


def test_intersect_conics_coordinate_plane():
    q1 = _sym({(0, 1): 1})                              # X0 X1
    q2 = _sym({(0, 0): 1, (1, 1): 1, (2, 2): -1})      # X0^2 + X1^2 - X2^2
    got = _points(intersect_conics(np.eye(3), q1, q2))
    assert got == {(0.0, 1.0, 1.0): 1, (0.0, 1.0, -1.0): 1, (1.0, 0.0, 1.0): 1, (1.0, 0.0, -1.0): 1}


def test_intersect_conics_tangency_has_multiplicity_two():
    q1 = _sym({(0, 0): 1, (0, 2): -1})                 # X0 (X0 - X2), the line X0 = X2 is tangent
    q2 = _sym({(0, 0): 1, (1, 1): 1, (2, 2): -1})
    got = _points(intersect_conics(np.eye(3), q1, q2))
    assert got[(1.0, 0.0, 1.0)] == 2
    assert sum(got.values()) == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_intersect_conics_bezout(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(2, 5, 5))
    basis = rng.normal(size=(3, 5))
    res = intersect_conics(basis, a + a.T, b + b.T)
    assert sum(m for _, m in res) == 4
    for p, _ in res:
        x = p.array()
        x = x / np.linalg.norm(x)
        for q in (a + a.T, b + b.T):
            assert abs(x @ q @ x) <= 1e-7 * np.linalg.norm(q)


def test_fit_residual_on_exact_form_is_tiny():
    rng = np.random.default_rng(9)
    g = rng.normal(size=(3, 3))
    g = g + g.T
    d = rng.normal(size=(20, 3))
    _, rel = fit_quadratic_form(d, np.einsum("ki,ij,kj->k", d, g, d))
    assert rel <= 1e-10


def test_fit_refuses_degenerate_directions():
    with pytest.raises(DegenerateInput):
        fit_quadratic_form(np.tile([1.0, 0.0, 0.0], (8, 1)), np.ones(8))


def test_intersect_conics_common_component():
    q1 = _sym({(0, 1): 1})                              # X0 X1
    q2 = _sym({(0, 0): 1, (0, 2): 1})                  # X0 (X0 + X2)
    with pytest.raises(CommonComponent):
        intersect_conics(np.eye(3), q1, q2)
