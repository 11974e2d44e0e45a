import json
import math

import numpy as np
import pytest

from minitwistor.cli import default_generic_point
from minitwistor.errors import AtCStarFixedPoint, NotOnSurface
from minitwistor.pencil import (EXPECTED_TABLE, classify_section, hessian_form, pencil_profile, profile_to_json,
                                special_hyperplanes, tangency_points, tangent_pencil)
from oracles import restricted_pencil_roots

MERGED = np.array([3.0, 0.0, 1.0, 0.0, 1.0])
H0_MERGED = np.array([0.0, 0.0, 1.0, 0.0, -1.0])
H3_MERGED = np.array([6.0, 0.0, 32.0, 0.0, -50.0])  # complex coefficients (3, 3, 32, 0, -50)


def test_merged_pencil_contains_the_tangent_hyperplanes(S):
    fr = tangent_pencil(S, MERGED)
    for h in (H0_MERGED, H3_MERGED):
        assert fr.contains(h, tol=1e-12)
        for v in (fr.P, fr.t1, fr.t2):
            assert abs(h @ v) <= 1e-12 * np.linalg.norm(h)


def test_frame_is_orthonormal(S):
    fr = tangent_pencil(S, default_generic_point(S))
    g = np.array([[fr.hA @ fr.hA, fr.hA @ fr.hB], [fr.hB @ fr.hA, fr.hB @ fr.hB]])
    assert np.allclose(g, np.eye(2), atol=1e-14)


def test_merged_special_members(S):
    fr = tangent_pencil(S, MERGED)
    sp = special_hyperplanes(S, MERGED, fr)
    assert sp.merged
    assert abs(sp["H3"].angle - fr.angle_of(H3_MERGED)) <= 1e-12
    assert abs(sp["H0"].angle - fr.angle_of(H0_MERGED)) <= 1e-12
    gap = abs(sp["H1"].angle - sp["H3"].angle) % math.pi
    assert min(gap, math.pi - gap) <= 1e-8


@pytest.mark.parametrize("which", ["generic", "merged"])
def test_hessian_roots_match_restricted_form(S, which):
    p = default_generic_point(S) if which == "generic" else MERGED
    fr = tangent_pencil(S, p)
    hess = hessian_form(S, p, fr)
    ref = restricted_pencil_roots(S, fr.P, fr)
    got = sorted(hess.roots)
    for a, b in zip(got, ref):
        d = abs(a - b) % math.pi
        assert min(d, math.pi - d) <= 1e-8


def test_tacnode_section(S):
    res = classify_section(S, H3_MERGED, node=MERGED)
    assert res.tag == "TacnodePoint"
    assert [sp.kind for sp in res.singular_points] == ["merged"]


def test_tangency_point_of_h3(S):
    pts = tangency_points(S, H3_MERGED)
    assert len(pts) == 1
    assert np.allclose(np.real(pts[0].point), MERGED, atol=1e-9)
    assert abs(pts[0].kappa) <= 1e-9


def test_h0_is_the_double_conic(S):
    assert classify_section(S, H0_MERGED).tag == "DoubleConicCircle"


def test_generic_profile_matches_table(S):
    prof = pencil_profile(S, default_generic_point(S))
    assert prof.table_ok, prof.diagnostics
    assert prof.order == ["H0", "H1", "H3", "H2", "H4"]
    assert [iv["tag"] for iv in prof.intervals] == [EXPECTED_TABLE[j] for j in ("J1", "J2", "J3", "J4", "J5")]
    json.dumps(profile_to_json(prof))


def test_merged_profile(S):
    prof = pencil_profile(S, MERGED)
    assert prof.merged and prof.table_ok, prof.diagnostics
    assert [iv["name"] for iv in prof.intervals] == ["J1", "J3", "J4", "J5"]
    h1 = [m for m in prof.members if m["name"] == "H1"][0]
    assert h1["tag"] == "TacnodePoint"


def test_pole_is_refused(S):
    with pytest.raises(AtCStarFixedPoint):
        pencil_profile(S, np.array([0.0, 0.0, 5.0, 3.0, 4.0]))


def test_point_on_second_sphere_is_refused(S):
    with pytest.raises(NotOnSurface):
        pencil_profile(S, np.array([0.0, 0.0, 5.0, 3.0, -4.0]))


def test_other_parameters(S):
    from minitwistor.segre import build_surface
    from minitwistor.weyl import random_sphere_point

    T = build_surface(10, -3, 20)
    rng = np.random.default_rng(11)
    for _ in range(3):
        prof = pencil_profile(T, random_sphere_point(T, 1, rng, 0.05))
        assert prof.table_ok, prof.diagnostics


def test_every_surface_point_lies_on_exactly_one_member(S):
    from minitwistor.tracer import find_zeros_on_circle
    from minitwistor.weyl import random_sphere_point

    p = default_generic_point(S)
    fr = tangent_pencil(S, p)
    rng = np.random.default_rng(4)
    for k in range(20):
        q = random_sphere_point(S, 1 + k % 2, rng)
        # h(psi + pi) = -h(psi), so one member shows up as two antipodal zeros
        zs = find_zeros_on_circle(lambda psi: fr.h(psi) @ q, period=2 * math.pi)
        assert [z.multiplicity for z in zs] == [1, 1]
        assert zs[1].angle - zs[0].angle == pytest.approx(math.pi, abs=1e-10)


def test_frame_exhausts_the_tangent_hyperplanes(S):
    fr = tangent_pencil(S, default_generic_point(S))
    rng = np.random.default_rng(6)
    m = np.vstack([fr.P, fr.t1, fr.t2])
    null = np.linalg.svd(m)[2][3:]
    for _ in range(10):
        r = rng.normal(size=2) @ null
        assert fr.contains(r, tol=1e-12)
        assert np.allclose(fr.h(fr.angle_of(r)), r / np.linalg.norm(r) * np.sign(r @ fr.h(fr.angle_of(r))))


def test_intervals_meet_at_the_special_members(S):
    prof = pencil_profile(S, default_generic_point(S), classify_members=False)
    sp = prof.specials
    ends = {"J1": ("H0", "H1"), "J2": ("H1", "H3"), "J3": ("H3", "H2"), "J4": ("H2", "H4"), "J5": ("H4", "H0")}
    for iv in prof.intervals:
        a, b = ends[iv["name"]]
        for got, name in ((iv["start"], a), (iv["end"], b)):
            d = abs(got - sp[name].angle) % math.pi
            assert min(d, math.pi - d) <= 1e-8


def test_second_sphere_circle_shrinks_to_the_involution_image(S):
    from minitwistor.segre import slice_of
    from minitwistor.weyl import w_chart

    p = default_generic_point(S)
    # H2 touches the second sphere at tau_2(p), H4 at tau_4(p)
    for end, j in ((0, 2), (1, 4)):
        target = p.copy()
        target[j] *= -1
        y = slice_of(target)
        dist = []
        for e in (0.2, 0.1, 0.05, 0.025, 0.0125):
            res = classify_section(S, w_chart(S, p, abs(end - e)).h)
            pts = np.vstack([c.points for c in res.components[2]])
            dist.append(float(np.max(np.linalg.norm(pts - y, axis=1))))
        assert all(a > b for a, b in zip(dist, dist[1:])), dist
        assert dist[-1] < 0.3 * dist[0]


def test_fibre_circles_sweep_the_second_sphere(S):
    from scipy.spatial import cKDTree

    from minitwistor.segre import slice_of, sphere_chart, sphere_grid
    from minitwistor.weyl import w_chart

    p = default_generic_point(S)
    pts = []
    for s in np.linspace(0.005, 0.995, 30):
        pts += [c.points for c in classify_section(S, w_chart(S, p, s).h).components[2]]
    for j in (2, 4):
        end = p.copy()
        end[j] *= -1
        pts.append(slice_of(end)[None])
    _, _, grid = sphere_grid(sphere_chart(S, 2), 10, 20, margin=0.05)
    g = np.array([slice_of(q) for q in grid.reshape(-1, 5)])
    assert len(g) == 200
    spacing = cKDTree(g).query(g, k=2)[0][:, 1].max()
    assert cKDTree(np.vstack(pts)).query(g)[0].max() <= spacing


def test_j2_shrinks_towards_the_b3_stratum(S):
    from minitwistor.segre import sphere_chart, sphere_point_real

    ch = sphere_chart(S, 1)
    widths = []
    for d in (0.4, 0.2, 0.1, 0.05, 0.025):
        p = sphere_point_real(ch, math.pi / 2 - d, 0.8)
        sp = special_hyperplanes(S, p, tangent_pencil(S, p))
        g = abs(sp["H1"].angle - sp["H3"].angle) % math.pi
        widths.append(min(g, math.pi - g))
    assert all(a > b for a, b in zip(widths, widths[1:])), widths
