import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage
from scipy.special import ellipe

from minitwistor.errors import AmbiguousTopology, SeedProjectionFailure
from minitwistor.tracer import (ConstraintSystem, MarkedPoint, StepPolicy, branch_directions,
                                classify_topology, distance_to_component, find_zeros_on_circle,
                                hyperplane_level, sphere_system, trace_level_set)
from oracles import lemniscate_length


def circle(r):
    return ConstraintSystem(2, lambda x: [x[0] ** 2 + x[1] ** 2 - r * r], lambda x: [[2 * x[0], 2 * x[1]]])


def lemniscate(a):
    def f(x):
        q = x[0] ** 2 + x[1] ** 2
        return [q * q - 2 * a * a * (x[0] ** 2 - x[1] ** 2)]

    def jac(x):
        q = x[0] ** 2 + x[1] ** 2
        return [[4 * x[0] * q - 4 * a * a * x[0], 4 * x[1] * q + 4 * a * a * x[1]]]

    return ConstraintSystem(2, f, jac)


def completed_length(comps):
    """Arc length plus the chords from trace ends to the marked node at the origin."""
    total = sum(c.arc_length for c in comps)
    for c in comps:
        if not c.closed:
            total += np.linalg.norm(c.points[0]) + np.linalg.norm(c.points[-1])
    return total


@pytest.mark.parametrize("r", [0.3, 1.0, 4.5])
def test_circle_length_and_closure(r):
    comps = trace_level_set(circle(r), [np.array([r * 1.1, 0.05])])
    assert len(comps) == 1 and comps[0].closed
    assert comps[0].arc_length == pytest.approx(2 * math.pi * r, rel=1e-4)
    assert comps[0].closure_gap <= 1e-6 * comps[0].diameter
    assert classify_topology(comps).tag == "CircleOnly"


def test_duplicate_seeds_are_merged():
    seeds = [np.array([1.0, 0.0]), np.array([0.0, 1.1]), np.array([-1.0, 0.2])]
    assert len(trace_level_set(circle(1.0), seeds)) == 1


@pytest.mark.parametrize("a", [0.5, 1.3])
def test_lemniscate_figure_eight(a):
    mk = [MarkedPoint(np.zeros(2), "node", 1e-3)]
    comps = trace_level_set(lemniscate(a), [np.array([1.5 * a, 0.1]), np.array([-1.5 * a, 0.1])], marked=mk)
    assert classify_topology(comps, mk).tag == "Figure8"
    assert completed_length(comps) == pytest.approx(lemniscate_length(a), rel=1e-4)


def test_lemniscate_branch_directions():
    kind, dirs = branch_directions(lemniscate(1.0), np.zeros(2))
    assert kind == "node"
    angles = sorted({round(math.degrees(math.atan2(d[1], d[0]))) % 180 for d in dirs})
    assert angles == [45, 135]


def test_cusp_loop():
    # y^2 = x^3 (1 - x): one loop with a cusp at the origin
    sys_ = ConstraintSystem(2, lambda x: [x[1] ** 2 - x[0] ** 3 * (1 - x[0])],
                            lambda x: [[-3 * x[0] ** 2 + 4 * x[0] ** 3, 2 * x[1]]])
    mk = [MarkedPoint(np.zeros(2), "cusp", 1e-3)]
    comps = trace_level_set(sys_, [np.array([0.6, 0.3])], marked=mk)
    assert classify_topology(comps, mk).tag == "CuspLoop"


def test_point_plus_circle():
    # (x^2 + y^2)((x-3)^2 + y^2 - 1) = 0 traced away from the origin
    def f(x):
        return [(x[0] ** 2 + x[1] ** 2) * ((x[0] - 3) ** 2 + x[1] ** 2 - 1)]

    mk = [MarkedPoint(np.zeros(2), "node", 1e-3)]
    comps = trace_level_set(ConstraintSystem(2, f), [np.array([4.1, 0.0])], marked=mk)
    assert classify_topology(comps, mk).tag == "PointPlusCircle"


def test_circle_through_marked_point_is_ambiguous():
    mk = [MarkedPoint(np.array([1.0, 0.0]), "node", 1e-3)]
    comps = trace_level_set(circle(1.0), [np.array([-1.0, 0.1])])
    with pytest.raises(AmbiguousTopology):
        classify_topology(comps, mk)


def test_circle_zero_finder_multiplicity():
    zs = find_zeros_on_circle(lambda t: math.sin(t) ** 2 * math.cos(t), period=2 * math.pi)
    mult = sorted((round(z.angle, 6), z.multiplicity) for z in zs)
    assert [m for _, m in mult] == [2, 1, 2, 1]


def test_step_policy_defaults_are_sane():
    p = StepPolicy()
    assert p.h_min < p.h_init < p.h_max


def ellipse(a, b):
    return ConstraintSystem(2, lambda x: [(x[0] / a) ** 2 + (x[1] / b) ** 2 - 1],
                            lambda x: [[2 * x[0] / a ** 2, 2 * x[1] / b ** 2]])


@pytest.mark.parametrize("a,b", [(2.0, 1.0), (0.5, 3.0)])
def test_ellipse_length(a, b):
    comps = trace_level_set(ellipse(a, b), [np.array([a, 0.2])])
    major, minor = max(a, b), min(a, b)
    exact = 4 * major * ellipe(1 - (minor / major) ** 2)
    assert len(comps) == 1 and comps[0].closed
    assert comps[0].arc_length == pytest.approx(exact, rel=1e-4)


def test_samples_satisfy_the_constraints():
    for system, seed in ((ellipse(2.0, 1.0), [2.0, 0.0]), (lemniscate(1.0), [1.2, 0.1])):
        comps = trace_level_set(system, [np.array(seed)], marked=[MarkedPoint(np.zeros(2), "node", 1e-3)])
        for c in comps:
            assert max(np.max(np.abs(system.values(x))) for x in c.points) <= 1e-10


def test_retrace_from_rotated_seed_agrees():
    system = ellipse(2.0, 1.0)
    first = trace_level_set(system, [np.array([2.0, 0.0])])[0]
    again = trace_level_set(system, [np.array([-1.2, 0.9])])[0]
    worst = max(distance_to_component(system, first, x) for x in again.points[::7])
    assert worst <= 1e-6 * first.diameter


def test_tracing_is_deterministic():
    runs = [trace_level_set(lemniscate(0.8), [np.array([1.0, 0.1]), np.array([-1.0, 0.1])],
                            marked=[MarkedPoint(np.zeros(2), "node", 1e-3)]) for _ in range(2)]
    assert len(runs[0]) == len(runs[1])
    for a, b in zip(*runs):
        assert np.array_equal(a.points, b.points)


def test_empty_level_set_has_no_components():
    system = ConstraintSystem(2, lambda x: [x[0] ** 2 + x[1] ** 2 + 1], lambda x: [[2 * x[0], 2 * x[1]]])
    g = np.linspace(-2, 2, 9)
    assert trace_level_set(system, [np.array([u, v]) for u in g for v in g]) == []
    with pytest.raises(SeedProjectionFailure):
        trace_level_set(system, [np.array([0.5, 0.5])], on_failure="raise")


def _sign_regions(f, n=401, box=1.5):
    g = np.linspace(-box, box, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    v = f(X, Y)
    return ndimage.label(v > 0)[1] + ndimage.label(v < 0)[1]


def test_figure_eight_against_sign_sampling():
    system = ConstraintSystem(2, lambda x: [x[0] ** 2 - x[0] ** 4 - x[1] ** 2],
                              lambda x: [[2 * x[0] - 4 * x[0] ** 3, -2 * x[1]]])
    mk = [MarkedPoint(np.zeros(2), "node", 1e-3)]
    comps = trace_level_set(system, [np.array([0.7, 0.3]), np.array([-0.7, 0.3])], marked=mk)
    assert classify_topology(comps, mk).tag == "Figure8"
    kind, dirs = branch_directions(system, np.zeros(2))
    # two branches, each leaving the node in two directions
    assert kind == "node" and len(dirs) == 4
    assert sorted({round(math.degrees(math.atan2(d[1], d[0]))) % 180 for d in dirs}) == [45, 135]
    # two lobes plus the outside
    assert _sign_regions(lambda x, y: x ** 2 - x ** 4 - y ** 2) == 3


def test_zero_finder_examples():
    zs = find_zeros_on_circle(lambda t: math.cos(2 * t))
    assert [z.multiplicity for z in zs] == [1, 1]
    assert [z.angle for z in zs] == pytest.approx([math.pi / 4, 3 * math.pi / 4], abs=1e-12)
    with pytest.raises(ValueError):
        find_zeros_on_circle(lambda t: math.cos(t))
    zs = find_zeros_on_circle(lambda t: math.sin(t) ** 2)
    assert len(zs) == 1 and zs[0].multiplicity == 2 and min(zs[0].angle, math.pi - zs[0].angle) < 1e-6


def test_sphere_system_derivatives(S):
    from minitwistor.pencil import tangent_pencil
    from minitwistor.cli import default_generic_point

    fr = tangent_pencil(S, default_generic_point(S))
    level, level_grad, _ = hyperplane_level(fr.h(0.7))
    system = sphere_system(S, level, level_grad)
    assert system.check_derivatives(np.random.default_rng(0), probes=10, scale=2.0) <= 1e-6


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.1, 10))
def test_first_harmonic_has_two_simple_zeros(phase, amp):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        zs = find_zeros_on_circle(lambda t: amp * math.cos(t - phase), period=2 * math.pi)
    assert [z.multiplicity for z in zs] == [1, 1]
    want = sorted([(phase + math.pi / 2) % (2 * math.pi), (phase - math.pi / 2) % (2 * math.pi)])
    for z, w in zip(zs, want):
        d = abs(z.angle - w)
        assert min(d, 2 * math.pi - d) <= 1e-10
