import math

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from minitwistor.scalar_geometry import proj_equal
from minitwistor.segre import default_surface, rotate_real, sphere_chart, sphere_point_real
from minitwistor.weyl import conformal_form, w_chart, w_locate

S = default_surface()
CH1 = sphere_chart(S, 1)
LO, HI = CH1.theta_bounds

theta = st.floats(LO + 1e-3, HI - 1e-3)
phi = st.floats(0, 2 * math.pi)
fibre = st.floats(0.01, 0.99)


@settings(max_examples=50, deadline=None)
@given(theta, phi, fibre)
def test_locate_inverts_chart(th, ph, s):
    w = w_chart(S, sphere_point_real(CH1, th, ph), s)
    back = w_locate(S, w.h)
    assert np.max(np.abs(back.p - w.p)) <= 1e-8
    assert abs(back.s - s) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(theta, phi, fibre, st.floats(-math.pi, math.pi))
def test_chart_commutes_with_rotation(th, ph, s, angle):
    p = sphere_point_real(CH1, th, ph)
    h = w_chart(S, p, s).h
    hr = w_chart(S, rotate_real(p, angle), s).h
    # rotating p rotates the (u, v) part of the hyperplane the same way
    assert np.allclose(rotate_real(h, angle), hr, atol=1e-12) or np.allclose(rotate_real(h, angle), -hr, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(theta, phi, fibre)
def test_signature_everywhere(th, ph, s):
    form = conformal_form(S, w_chart(S, sphere_point_real(CH1, th, ph), s))
    assert form.signature == (2, 1, 0)
    assert form.residual <= 1e-6


@settings(max_examples=100)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=5, max_size=5),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_projective_equality_is_scale_invariant(v, lam):
    a = np.array(v)
    assume(np.max(np.abs(a)) > 1e-3)
    assert proj_equal(a, lam * a, tol=1e-9)
