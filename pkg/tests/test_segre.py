import math
from fractions import Fraction

import numpy as np
import pytest

from minitwistor.errors import DegenerateParams, ExactModeUnavailable, NoSpheres
from minitwistor.scalar_geometry import ProjPoint, apply_real_structure
from minitwistor.segre import (branch_real_locus, build_surface, discriminant_angles, fiber_real_locus,
                               involution_tau, is_on_branch, project_f, project_pi, quadric_Q,
                               quadric_real_type, rotate_real, sphere_chart, sphere_membership, sphere_point,
                               sphere_point_real, sphere_tangent_basis, surface_to_json)


def test_default_square_roots_are_rational(S_exact):
    assert tuple(S_exact.sqrt_abc) == (5, 3, 4)
    assert all(isinstance(r, Fraction) for r in S_exact.sqrt_abc)


def test_exact_mode_needs_rational_roots():
    with pytest.raises(ExactModeUnavailable):
        build_surface(10, -3, 20, "exact")


def test_repeated_parameters_rejected():
    with pytest.raises(DegenerateParams):
        build_surface(1, 1, 3)


def test_reversed_orientation_swaps_x3_x4():
    R = build_surface(16, 25, 0)
    assert R.source_params.orientation == "reversed"
    assert R.permutation == (0, 1, 2, 4, 3)
    assert R.has_spheres


def test_no_spheres_case():
    N = build_surface(1, 2, 3)
    assert not N.has_spheres
    assert surface_to_json(N)["realLocus"] == "none-or-torus"
    with pytest.raises(NoSpheres):
        sphere_chart(N, 1)


def test_discriminant_angles_are_increasing(S):
    ang = discriminant_angles(S)
    assert ang == sorted(ang)
    assert math.isclose(ang[0], math.atan2(4, 3))


def test_quadric_types_are_spheres(S):
    assert [quadric_real_type(S, j) for j in (2, 3, 4)] == ["sphere"] * 3


def test_poles_project_to_lambdas(S):
    for p, lam in zip(S.poles, S.lambdas):
        assert project_f(S, p) == lam


def test_fibre_over_lambda_is_a_point(S):
    assert fiber_real_locus(S, ProjPoint([1, 0.6, 0.8])).kind == "point"
    assert fiber_real_locus(S, ProjPoint([1, 1, 0])).kind == "empty"


def test_sphere_membership(S):
    assert sphere_membership(S, [0, 0, 5, 3, 4]) == 1
    assert sphere_membership(S, [0, 0, 5, 3, -4]) == 2
    assert sphere_membership(S, [1, 1, 1, 1, 1]) is None


def test_chart_points_lie_on_the_surface(S):
    rng = np.random.default_rng(3)
    for which in (1, 2):
        ch = sphere_chart(S, which)
        lo, hi = ch.theta_bounds
        for _ in range(20):
            w = sphere_point_real(ch, rng.uniform(lo + 1e-3, hi - 1e-3), rng.uniform(0, 2 * math.pi))
            assert S.contains_real(w)
            assert sphere_membership(S, w) == which


def test_circle_action_preserves_the_surface(S):
    w = np.array([3.0, 0.0, 1.0, 0.0, 1.0])
    assert S.contains_real(rotate_real(w, 1.3))


def test_tangent_basis_is_tangent(S):
    w, t1, t2 = sphere_tangent_basis(S, np.array([3.0, 0.0, 1.0, 0.0, 1.0]))
    for t in (t1, t2):
        assert abs(w @ S.A_real @ t) < 1e-12 and abs(w @ S.B_real @ t) < 1e-12


def test_third_branch_quadric_and_a_point_on_b3(S_exact):
    m = quadric_Q(S_exact, 3).matrix
    assert [m[i][i] for i in range(4)] == [0, 0, 16, -25] and m[0][1] == Fraction(1, 2)
    assert is_on_branch(S_exact, 3, ProjPoint((3, 3, 1, 1), "exact"))
    assert not is_on_branch(S_exact, 3, ProjPoint((3, 3, 1, -2), "exact"))


def test_real_loci_of_branch_divisors(S):
    assert branch_real_locus(S, 2)["components"] == ["empty", "empty"]
    assert branch_real_locus(S, 4)["components"] == ["empty", "empty"]
    b3 = branch_real_locus(S, 3)
    assert b3["components"] == ["circle", "circle"] and b3["intersection"] == "empty"


@pytest.mark.parametrize("j", [2, 3, 4])
def test_involutions(S_exact, j):
    rng = np.random.default_rng(j)
    for _ in range(10):
        z = tuple(complex(*rng.normal(size=2)) for _ in range(5))
        p = ProjPoint(z, "approx")
        assert involution_tau(j, involution_tau(j, p)) == p
        assert involution_tau(j, apply_real_structure(p)) == apply_real_structure(involution_tau(j, p))
        assert project_pi(j, involution_tau(j, p)) == project_pi(j, p)
    for p in S_exact.poles:
        assert S_exact.contains(involution_tau(j, p))


def test_chart_example_is_the_merged_point(S):
    p = sphere_point(sphere_chart(S, 1), math.pi / 2, 0.0)
    assert np.allclose(p.array(), [3, 3, 1, 0, 1], atol=1e-12)


def test_poles_on_the_expected_spheres(S):
    assert [sphere_membership(S, p.array().real) for p in S.poles] == [1, 1, 2, 2]


def test_fibre_locus_sign_pattern(S):
    a = discriminant_angles(S)
    arcs = [(a[0], a[1]), (a[2], a[3])]
    for th in np.linspace(0.01, 2 * math.pi - 0.01, 200):
        kind = fiber_real_locus(S, ProjPoint([1.0, math.cos(th), math.sin(th)])).kind
        inside = any(lo < th < hi for lo, hi in arcs)
        assert kind == ("circle" if inside else "empty"), th
    for lam in S.lambdas:
        assert fiber_real_locus(S, lam).kind == "point"


def test_sigma_swaps_lines_pointwise(S):
    for i in range(1, 5):
        a, b = S.lines[f"l{i}"]
        c, d = S.lines[f"lbar{i}"]
        other = np.array([c.array(), d.array()])
        for t in np.linspace(-2, 2, 10):
            z = a.array() + t * np.exp(0.3j) * b.array()
            assert S.contains(ProjPoint(tuple(z)))
            sz = apply_real_structure(ProjPoint(tuple(z))).array()
            # sz lies on the span of lbar_i
            coef, *_ = np.linalg.lstsq(other.T, sz, rcond=None)
            assert np.max(np.abs(other.T @ coef - sz)) <= 1e-12 * np.max(np.abs(sz))
