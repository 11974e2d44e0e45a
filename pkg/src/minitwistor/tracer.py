"""Predictor-corrector continuation of curves cut out by k = n - 1 equations
in R^n, plus contour tracing on the two real spheres of the surface.

The curves met in this package are real hyperplane sections of the spheres
and the geodesic level curves. Both are handled as zero sets of three
functions on R^4 (the two sphere constraints in the slice x2 = 1, plus one
level function), so the poles of the spheres are ordinary points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.spatial.distance import pdist

from .errors import AmbiguousTopology, GridTooCoarse, SeedProjectionFailure
from .segre import (
    sphere_chart,
    sphere_constraint_jacobian,
    sphere_constraints,
    sphere_grid,
    slice_of,
)


@dataclass(frozen=True)
class ConstraintSystem:
    """Curve {x in R^n : residual(x) = 0} with residual of length n - 1.

    ``jacobian`` may be None, in which case central differences are used.
    ``level_index`` names the distinguished level function among the residuals.
    """

    dim: int
    residual: object
    jacobian: object = None
    level_index: int = -1

    def values(self, x):
        return np.asarray(self.residual(x), dtype=float)

    def jac(self, x):
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x), dtype=float)
        return finite_difference_jacobian(self.residual, x)

    def check_derivatives(self, rng, probes=5, scale=1.0, h=1e-6):
        """Largest relative mismatch between supplied and finite-difference derivatives."""
        worst = 0.0
        for _ in range(probes):
            x = rng.normal(size=self.dim) * scale
            d = rng.normal(size=self.dim)
            d /= np.linalg.norm(d)
            fd = (self.values(x + h * d) - self.values(x - h * d)) / (2 * h)
            an = self.jac(x) @ d
            worst = max(worst, float(np.linalg.norm(fd - an) / max(np.linalg.norm(an), 1e-12)))
        return worst


def finite_difference_jacobian(fun, x, h=1e-7):
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x), dtype=float)
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h * max(1.0, abs(x[i]))
        jac[:, i] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * e[i])
    return jac


@dataclass(frozen=True)
class StepPolicy:
    h_init: float = 0.02
    h_min: float = 1e-8
    h_max: float = 0.1
    grow: float = 1.5
    corrector_tol: float = 1e-12
    corrector_iters: int = 8
    min_cos: float = 0.97
    max_steps: int = 20000
    closure_rel: float = 1e-6
    max_correction: float = 0.3  # corrector displacement / step


@dataclass(frozen=True)
class MarkedPoint:
    """A known singular point of the traced set; traces stop inside its ball."""

    location: np.ndarray
    kind: str = "node"
    radius: float = 1e-3
    branches: tuple = ()


@dataclass
class TraceComponent:
    points: np.ndarray
    tangents: np.ndarray
    closed: bool
    closure_gap: float
    arc_length: float
    diameter: float
    start_mark: int | None = None
    end_mark: int | None = None
    singular: list = field(default_factory=list)
    step_stats: dict = field(default_factory=dict)
    termination: tuple = ()
    obstruction: object = None

    @property
    def n(self):
        return len(self.points)

    def arc_parameter(self):
        seg = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])


# ---------------------------------------------------------------------------
# core numerics


def _min_norm_step(jac, g):
    jjt = jac @ jac.T
    return jac.T @ np.linalg.solve(jjt, g)


def project_to_curve(system, x, tol=1e-12, iters=30, max_move=None):
    """Gauss-Newton with minimum-norm corrections; returns the converged point or None."""
    x = np.array(x, dtype=float)
    start = x.copy()
    for _ in range(iters):
        g = system.values(x)
        if np.max(np.abs(g)) <= tol:
            return x
        jac = system.jac(x)
        try:
            dx = _min_norm_step(jac, g)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(dx)):
            return None
        x = x - dx
        if max_move is not None and np.linalg.norm(x - start) > max_move:
            return None
    g = system.values(x)
    return x if np.max(np.abs(g)) <= tol * 10 else None


def curve_tangent(jac, previous=None):
    _, _, vh = np.linalg.svd(jac)
    t = vh[-1]
    if previous is not None and np.dot(t, previous) < 0:
        t = -t
    return t / np.linalg.norm(t)


def _segment_param(a, b, x):
    seg = b - a
    ll = float(np.dot(seg, seg))
    if ll == 0:
        return 0.0, float(np.linalg.norm(x - a))
    s = float(np.dot(x - a, seg) / ll)
    return s, float(np.linalg.norm(x - a - s * seg))


def distance_to_arc(system, a, b, x, tol=1e-12):
    """Distance from x to the curve piece between two consecutive samples a, b.

    The piece is swept by projecting chord points onto the curve.
    """

    def dist(s):
        y = project_to_curve(system, a + s * (b - a), tol=tol, iters=12)
        return np.inf if y is None else float(np.linalg.norm(y - x))

    res = minimize_scalar(dist, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    return float(min(res.fun, dist(0.0), dist(1.0)))


def distance_to_component(system, comp, x):
    """Distance from x to the curve traced by ``comp`` (not just its polyline)."""
    pts = comp.points
    d = np.linalg.norm(pts - x, axis=1)
    k = int(np.argmin(d))
    best = np.inf
    for i in (k - 1, k):
        if 0 <= i < len(pts) - 1:
            best = min(best, distance_to_arc(system, pts[i], pts[i + 1], x))
    return best


def _polyline_distance(points, x):
    a = points[:-1]
    b = points[1:]
    seg = b - a
    ll = np.einsum("ij,ij->i", seg, seg)
    ll = np.where(ll == 0, 1.0, ll)
    s = np.clip(np.einsum("ij,ij->i", x - a, seg) / ll, 0.0, 1.0)
    proj = a + s[:, None] * seg
    d = np.linalg.norm(proj - x, axis=1)
    k = int(np.argmin(d))
    return float(d[k]), k


def _arc_length(points, tangents):
    total = 0.0
    for i in range(len(points) - 1):
        chord = points[i + 1] - points[i]
        c = float(np.linalg.norm(chord))
        if c == 0:
            continue
        u = chord / c
        a1 = math.acos(max(-1.0, min(1.0, float(np.dot(tangents[i], u)))))
        if tangents[i + 1] is None or not np.all(np.isfinite(tangents[i + 1])):
            theta = 2 * a1
        else:
            theta = a1 + math.acos(max(-1.0, min(1.0, float(np.dot(u, tangents[i + 1])))))
        half = 0.5 * theta
        total += c * (half / math.sin(half) if half > 1e-8 else 1.0 + half * half / 6)
    return total


def _march(system, x0, t0, policy, marked, armed, inside, allow_close, scale):
    """Walk from x0 along t0. Returns (points, tangents, reason, mark, gap, obstruction, stats)."""
    pts = [x0.copy()]
    tans = [t0.copy()]
    x, t = x0.copy(), t0.copy()
    h = policy.h_init
    walked = 0.0
    rejections = 0
    steps = []
    armed = list(armed)
    for _ in range(policy.max_steps):
        accepted = False
        # near an armed marked point shrink the step so the trace enters the
        # ball instead of switching to the other branch across the point
        for k, m in enumerate(marked):
            if armed[k]:
                h = min(h, max(0.5 * float(np.linalg.norm(x - m.location)), 0.5 * m.radius))
        while not accepted:
            if h < policy.h_min:
                return pts, tans, "underflow", None, None, x.copy(), (steps, rejections)
            xp = x + h * t
            y = xp
            ok = False
            for it in range(policy.corrector_iters):
                g = system.values(y)
                if np.max(np.abs(g)) <= policy.corrector_tol * scale:
                    ok = True
                    break
                try:
                    y = y - _min_norm_step(system.jac(y), g)
                except np.linalg.LinAlgError:
                    break
                if not np.all(np.isfinite(y)):
                    break
            if ok and np.linalg.norm(y - xp) <= policy.max_correction * h:
                tn = curve_tangent(system.jac(y), t)
                if np.dot(tn, t) >= policy.min_cos:
                    accepted = True
                    fast = it <= 2
                    break
            rejections += 1
            h *= 0.5
        step = float(np.linalg.norm(y - x))
        steps.append(step)
        walked += step
        a = x
        x, t = y, tn
        if inside is not None and not inside(x):
            pts.append(x.copy())
            tans.append(t.copy())
            return pts, tans, "boundary", None, None, None, (steps, rejections)
        for k, m in enumerate(marked):
            dm = np.linalg.norm(x - m.location)
            if armed[k] and dm < m.radius:
                pts.append(m.location.copy())
                tans.append(np.full_like(t, np.nan))
                return pts, tans, "marked", k, None, None, (steps, rejections)
            if not armed[k] and dm > 1.5 * m.radius:
                armed[k] = True
            # a step may jump across the ball without landing inside it
            if armed[k]:
                s, perp = _segment_param(a, x, m.location)
                if 0.0 < s < 1.0 and perp < m.radius:
                    pts.append(m.location.copy())
                    tans.append(np.full_like(t, np.nan))
                    return pts, tans, "marked", k, None, None, (steps, rejections)
        if allow_close and walked > 3 * max(step, policy.h_init):
            s, perp = _segment_param(a, x, x0)
            if -0.05 <= s <= 1.05 and perp <= 0.5 * step + 1e-9:
                gap = distance_to_arc(system, a, x, x0)
                extent = np.ptp(np.array(pts + [x]), axis=0)
                tol = policy.closure_rel * max(float(np.linalg.norm(extent)), 1e-12)
                if gap <= tol:
                    pts.append(x0.copy())
                    tans.append(t0.copy())
                    return pts, tans, "closed", None, gap, None, (steps, rejections)
        pts.append(x.copy())
        tans.append(t.copy())
        if fast:
            h = min(h * policy.grow, policy.h_max)
    return pts, tans, "max-steps", None, None, None, (steps, rejections)


def trace_from(system, seed, policy=None, marked=(), inside=None, direction=None, scale=1.0):
    """Trace the component through ``seed`` (projected onto the curve first)."""
    policy = policy or StepPolicy()
    x0 = project_to_curve(system, seed, tol=policy.corrector_tol * scale)
    if x0 is None:
        raise SeedProjectionFailure(f"could not project seed {np.asarray(seed)} onto the curve")
    t0 = curve_tangent(system.jac(x0), direction)
    armed = [np.linalg.norm(x0 - m.location) > 1.2 * m.radius for m in marked]
    fwd = _march(system, x0, t0, policy, marked, armed, inside, True, scale)
    pts, tans, reason, mark, gap, obstruction, (steps, rej) = fwd
    start_mark = None
    back_reason = None
    if reason != "closed":
        bwd = _march(system, x0, -t0, policy, marked, armed, inside, False, scale)
        bpts, btans, back_reason, bmark, _, bobs, (bsteps, brej) = bwd
        pts = bpts[::-1][:-1] + pts
        tans = [-v for v in btans[::-1][:-1]] + tans
        start_mark = bmark
        steps = bsteps + steps
        rej += brej
        obstruction = obstruction if obstruction is not None else bobs
    points = np.array(pts)
    tangents = [None if not np.all(np.isfinite(v)) else v for v in tans]
    arc = _arc_length(points, _fill_tangents(points, tangents))
    diam = float(np.max(pdist(points))) if len(points) > 1 else 0.0
    closed = False
    gap_value = float(np.linalg.norm(points[0] - points[-1]))
    if reason == "closed":
        gap_value = float(gap)
        closed = gap_value <= policy.closure_rel * max(diam, 1e-12) and np.dot(tans[-2], t0) > 0.9
    stats = {
        "steps": len(steps),
        "min": float(min(steps)) if steps else 0.0,
        "max": float(max(steps)) if steps else 0.0,
        "mean": float(np.mean(steps)) if steps else 0.0,
        "rejections": int(rej),
    }
    tan_arr = np.array([v if v is not None else np.full(points.shape[1], np.nan) for v in tangents])
    return TraceComponent(
        points=points, tangents=tan_arr, closed=bool(closed), closure_gap=gap_value,
        arc_length=float(arc), diameter=diam, start_mark=start_mark,
        end_mark=mark if reason == "marked" else None,
        step_stats=stats, termination=(back_reason, reason) if back_reason else (reason,),
        obstruction=obstruction,
    )


def _fill_tangents(points, tangents):
    out = []
    n = len(points)
    for i, t in enumerate(tangents):
        if t is not None:
            out.append(t)
            continue
        if i == n - 1:
            d = points[i] - points[i - 1]
        else:
            d = points[i + 1] - points[i]
        nd = np.linalg.norm(d)
        out.append(d / nd if nd > 0 else None)
    # a marked end: use the chord as the end tangent only for the half-angle rule
    if tangents[-1] is None:
        out[-1] = None
    return out


def _same_component(system, comp, x, policy):
    if len(comp.points) < 2:
        return bool(np.linalg.norm(comp.points[0] - x) < 1e-9)
    d, k = _polyline_distance(comp.points, x)
    a, b = comp.points[k], comp.points[k + 1]
    step = float(np.linalg.norm(b - a))
    ta, tb = comp.tangents[k], comp.tangents[k + 1]
    if np.all(np.isfinite(ta)) and np.all(np.isfinite(tb)):
        turn = math.acos(max(-1.0, min(1.0, float(np.dot(ta, tb)))))
    else:
        turn = 0.5
    sagitta = step * turn / 4 + 1e-9
    return d <= 2 * sagitta


def trace_level_set(system, seeds, policy=None, marked=(), inside=None, scale=1.0,
                    on_failure="skip"):
    """Trace every component reached from ``seeds``; duplicates are merged.

    Seeds that fail to project are skipped (``on_failure="skip"``) or raise
    SeedProjectionFailure (``on_failure="raise"``).
    """
    policy = policy or StepPolicy()
    comps = []
    for seed in seeds:
        direction = None
        if isinstance(seed, tuple):
            seed, direction = seed
        x = project_to_curve(system, seed, tol=policy.corrector_tol * scale)
        if x is None:
            if on_failure == "raise":
                raise SeedProjectionFailure(f"could not project seed {seed}")
            continue
        if any(np.linalg.norm(x - m.location) < m.radius for m in marked):
            continue
        if any(_same_component(system, c, x, policy) for c in comps):
            continue
        comp = trace_from(system, x, policy, marked, inside, direction, scale)
        comps.append(comp)
    return comps


# ---------------------------------------------------------------------------
# local analysis at singular points


def lagrange_hessian(system, x, eps=1e-5):
    """Branch cone data at a singular point x of the traced set.

    Returns (tangent_basis T (n x m), restricted Hessian M (m x m)) where the
    first k-1 residuals define the ambient manifold and the last is the level
    function; M is the Hessian of level - sum(mu_i g_i) restricted to T.
    """
    jac = system.jac(x)
    level = system.level_index % jac.shape[0]
    cons = [i for i in range(jac.shape[0]) if i != level]
    jg = jac[cons]
    mu, *_ = np.linalg.lstsq(jg.T, jac[level], rcond=None)
    _, _, vh = np.linalg.svd(jg)
    tb = vh[jg.shape[0]:].T

    def grad_l(y):
        j = system.jac(y)
        return j[level] - j[cons].T @ mu

    m = np.empty((tb.shape[1], tb.shape[1]))
    for a in range(tb.shape[1]):
        d = (grad_l(x + eps * tb[:, a]) - grad_l(x - eps * tb[:, a])) / (2 * eps)
        for b in range(tb.shape[1]):
            m[a, b] = float(np.dot(tb[:, b], d))
    m = 0.5 * (m + m.T)
    return tb, m


def branch_directions(system, x, rel_tol=1e-6):
    """Classify a singular point by its quadratic cone: ('node', dirs) with
    four half-branch directions, ('cusp', dirs) with the two directions along
    the double line, or ('isolated', ())."""
    tb, m = lagrange_hessian(system, x)
    ev, vec = np.linalg.eigh(m)
    big = max(abs(ev[0]), abs(ev[-1]), 1e-300)
    if ev[0] < -rel_tol * big and ev[-1] > rel_tol * big:
        # null directions of the indefinite 2x2 form
        a = math.sqrt(-ev[0])
        c = math.sqrt(ev[-1])
        dirs = []
        for sgn in (1.0, -1.0):
            d = c * vec[:, 0] + sgn * a * vec[:, -1]
            d = tb @ (d / np.linalg.norm(d))
            dirs.extend([d, -d])
        return "node", tuple(dirs)
    if min(abs(ev[0]), abs(ev[-1])) <= rel_tol * big:
        k = 0 if abs(ev[0]) < abs(ev[-1]) else len(ev) - 1
        d = tb @ vec[:, k]
        return "cusp", (d, -d)
    return "isolated", ()


# ---------------------------------------------------------------------------
# periodic zero finding


@dataclass(frozen=True)
class CircleZero:
    angle: float
    multiplicity: int
    value: float


def find_zeros_on_circle(g, period=math.pi, n=720, xtol=1e-12, double_tol=1e-8):
    """Zeros of a continuous periodic function on [0, period).

    Sign changes on an n-point grid are refined by Brent's method; a cell
    without a sign change whose minimum of |g| drops below ``double_tol``
    (relative to max |g| on the grid) is reported as a double zero. If such
    a cell actually contains two sign changes a GridTooCoarse warning is
    issued and both zeros are returned.
    """
    grid = period * np.arange(n) / n
    vals = np.array([float(g(p)) for p in grid])
    scale = float(np.max(np.abs(vals)))
    if scale == 0:
        raise ValueError("g vanishes on the whole grid")
    end = float(g(period))
    if abs(end - vals[0]) > 1e-9 * scale:
        raise ValueError(f"g is not {period:.6g}-periodic: g(0) = {vals[0]:.6g}, g(period) = {end:.6g}")
    tiny = 1e-15 * scale
    step = period / n
    zeros = []

    def add(angle, mult):
        angle = angle % period
        for z in zeros:
            dz = abs(z[0] - angle)
            if min(dz, period - dz) < 1e-9:
                z[1] = max(z[1], mult)
                return
        zeros.append([angle, mult])

    for i in range(n):
        j = (i + 1) % n
        vi, vj = vals[i], vals[j]
        lo = grid[i]
        hi = lo + step
        if abs(vi) <= tiny:
            left, right = vals[i - 1], vals[j]
            add(lo, 1 if left * right < 0 else 2)
            continue
        if abs(vj) <= tiny:
            continue
        if vi * vj < 0:
            add(brentq(lambda p: g(p), lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps), 1)
            continue
        # look for a dip at a local minimum of |g|
        if abs(vi) <= abs(vals[i - 1]) and abs(vi) <= abs(vj):
            sgn = math.copysign(1.0, vi)
            # a sign change in the previous cell is handled there; stay out of it
            left = lo - step if vals[i - 1] * vi > 0 else lo
            res = minimize_scalar(lambda p: sgn * g(p), bounds=(left, hi), method="bounded",
                                  options={"xatol": xtol})
            gm = g(res.x)
            if gm * vi < 0:
                warnings.warn(GridTooCoarse(f"two zeros inside one grid cell near {res.x:.6g}"))
                add(brentq(lambda p: g(p), left, res.x, xtol=xtol), 1)
                add(brentq(lambda p: g(p), res.x, hi, xtol=xtol), 1)
            elif abs(gm) <= double_tol * scale:
                add(res.x, 2)
    zeros.sort(key=lambda z: z[0])
    return [CircleZero(float(a), int(m), float(g(a))) for a, m in zeros]


# ---------------------------------------------------------------------------
# topology


@dataclass
class TopologyReport:
    tag: str
    component_count: int
    closed: list
    marked_incidence: dict
    branch_count: dict
    circles: int
    lobes: int
    notes: list = field(default_factory=list)


def _departure(comp, at_start):
    pts = comp.points
    if at_start:
        d = pts[min(3, len(pts) - 1)] - pts[0]
    else:
        d = pts[max(len(pts) - 4, 0)] - pts[-1]
    return d / np.linalg.norm(d)


def classify_topology(components, marked=(), cusp_angle_deg=20.0):
    """Shape of a traced real curve relative to marked singular points.

    Tags: Figure8, CuspLoop, PointPlusCircle, PointOnly, CircleOnly, Empty,
    or Other (with notes).
    """
    incidence = {k: 0 for k in range(len(marked))}
    lobes, circles, others = [], [], []
    notes = []
    for c in components:
        if c.start_mark is not None:
            incidence[c.start_mark] += 1
        if c.end_mark is not None:
            incidence[c.end_mark] += 1
        if c.start_mark is not None and c.start_mark == c.end_mark:
            lobes.append(c)
        elif c.closed and c.start_mark is None and c.end_mark is None:
            circles.append(c)
        else:
            others.append(c)
    for c in circles:
        for k, m in enumerate(marked):
            d, _ = _polyline_distance(c.points, m.location)
            if d < 2 * m.radius:
                raise AmbiguousTopology(
                    "a closed trace passes through the ball of a marked point",
                    candidates=("PointPlusCircle", "Figure8"))
    branch = {k: v / 2 for k, v in incidence.items()}
    if others:
        notes.append(f"{len(others)} open or inter-point arcs")
    if len(marked) == 0:
        tag = "Empty" if not components else ("CircleOnly" if not others else "Other")
    elif others:
        tag = "Other"
    elif len(lobes) == 2:
        tag = "Figure8"
    elif len(lobes) == 1:
        d0 = _departure(lobes[0], True)
        d1 = _departure(lobes[0], False)
        angle = math.degrees(math.acos(max(-1.0, min(1.0, float(np.dot(d0, d1))))))
        # a loop at a point already typed as a cusp only needs a loose check:
        # the branch bends like |x|^(3/2), so the departure angle at the ball
        # boundary is of order sqrt(radius)
        k = lobes[0].start_mark
        limit = 3 * cusp_angle_deg if marked[k].kind == "cusp" else cusp_angle_deg
        if angle <= limit:
            tag = "CuspLoop"
        else:
            raise AmbiguousTopology(
                f"single loop through the marked point with corner angle {angle:.1f} deg",
                candidates=("CuspLoop", "Figure8"))
    elif len(lobes) == 0:
        tag = "PointPlusCircle" if circles else "PointOnly"
    else:
        tag = "Other"
        notes.append(f"{len(lobes)} loops through a marked point")
    return TopologyReport(
        tag=tag, component_count=len(components), closed=[c.closed for c in components],
        marked_incidence=incidence, branch_count=branch, circles=len(circles), lobes=len(lobes),
        notes=notes,
    )


# ---------------------------------------------------------------------------
# tracing on the real spheres


def sphere_system(S, level, level_grad):
    """Constraint system in slice coordinates y = (u, v, x3, x4): the two
    sphere equations plus ``level(y) = 0``."""

    def residual(y):
        c = sphere_constraints(S, y)
        return np.array([c[0], c[1], level(y)])

    def jacobian(y):
        j = sphere_constraint_jacobian(S, y)
        return np.vstack([j, level_grad(y)])

    return ConstraintSystem(4, residual, jacobian)


def hyperplane_level(r):
    """Affine level function of a real hyperplane (real-form coefficients r) on the slice."""
    r = np.asarray(r, dtype=float)
    r = r / np.linalg.norm(r)
    grad = np.array([r[0], r[1], r[3], r[4]])

    def level(y):
        return float(r[0] * y[0] + r[1] * y[1] + r[2] + r[3] * y[2] + r[4] * y[3])

    def level_grad(y):
        return grad

    def level_grid(pts):
        return pts @ r

    return level, level_grad, level_grid


def _retract(S, y):
    sys2 = ConstraintSystem(4, lambda z: sphere_constraints(S, z),
                            lambda z: sphere_constraint_jacobian(S, z))
    return project_to_curve(sys2, y, tol=1e-13, iters=20)


def _critical_point(S, level, level_grad, y0, iters=30):
    """Newton on the Lagrange system of level restricted to the sphere."""
    y = np.array(y0, dtype=float)
    mu = np.zeros(2)
    jg = sphere_constraint_jacobian(S, y)
    mu, *_ = np.linalg.lstsq(jg.T, level_grad(y), rcond=None)
    hg = [2 * np.diag([1.0, 1.0, -S.beta, -S.gamma]), 2 * np.diag([0.0, 0.0, -1.0, -1.0])]
    for _ in range(iters):
        jg = sphere_constraint_jacobian(S, y)
        grad = level_grad(y)
        hf = finite_difference_jacobian(level_grad, y, h=1e-6)
        f = np.concatenate([grad - jg.T @ mu, sphere_constraints(S, y)])
        if np.max(np.abs(f)) < 1e-13:
            return y
        big = np.zeros((6, 6))
        big[:4, :4] = hf - mu[0] * hg[0] - mu[1] * hg[1]
        big[:4, 4:] = -jg.T
        big[4:, :4] = jg
        try:
            d = np.linalg.solve(big, -f)
        except np.linalg.LinAlgError:
            return None
        y += d[:4]
        mu += d[4:]
    return y if np.max(np.abs(sphere_constraints(S, y))) < 1e-10 else None


def sphere_seeds(S, which, level, level_grad, level_grid, n_theta=48, n_phi=48, exclude=()):
    """Seeds on one sphere: grid-edge sign changes plus points on small ovals
    found from the level function's critical points."""
    chart = sphere_chart(S, which)
    _, _, pts = sphere_grid(chart, n_theta, n_phi)
    vals = level_grid(pts)
    slc = np.stack([pts[..., 0], pts[..., 1], pts[..., 3], pts[..., 4]], axis=-1)
    seeds = []
    for axis in (0, 1):
        if axis == 0:
            va, vb = vals[:-1, :], vals[1:, :]
            pa, pb = slc[:-1, :], slc[1:, :]
        else:
            va, vb = vals, np.roll(vals, -1, axis=1)
            pa, pb = slc, np.roll(slc, -1, axis=1)
        mask = va * vb < 0
        for idx in zip(*np.nonzero(mask)):
            fa, fb = va[idx], vb[idx]
            w = fa / (fa - fb)
            seeds.append(pa[idx] + w * (pb[idx] - pa[idx]))
    # extrema of the grid values; small ovals around them may fall between grid lines
    scale = float(np.max(np.abs(vals))) if vals.size else 1.0
    padded = np.pad(vals, ((1, 1), (0, 0)), mode="edge")
    neigh = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neigh.append(np.roll(padded, -dj, axis=1)[1 + di: 1 + di + vals.shape[0], :])
    neigh = np.array(neigh)
    is_max = np.all(vals >= neigh, axis=0)
    is_min = np.all(vals <= neigh, axis=0)
    flat = slc.reshape(-1, 4)
    fvals = vals.reshape(-1)
    for idx in zip(*np.nonzero(is_max | is_min)):
        c = _critical_point(S, level, level_grad, slc[idx])
        if c is None:
            continue
        fc = level(c)
        if abs(fc) <= 1e-10 * max(scale, 1e-300):
            continue
        if any(np.linalg.norm(c - e) < 1e-6 for e in exclude):
            continue
        opposite = np.nonzero(fvals * fc < 0)[0]
        if opposite.size == 0:
            continue
        q = flat[opposite[np.argmin(np.linalg.norm(flat[opposite] - c, axis=1))]]
        seed = _seed_between(S, level, c, q)
        if seed is not None:
            seeds.append(seed)
    return seeds


def local_oval_seeds(S, level, level_grad, center, radii=(0.004, 0.015, 0.05), n_dir=8):
    """Seeds on small ovals that hug a singular point.

    Critical points of the level function are searched from rings around
    ``center``; an oval around such a point is seeded on the path back to
    ``center``, where the level function has the opposite sign.
    """
    center = np.asarray(center, dtype=float)
    jg = sphere_constraint_jacobian(S, center)
    q, _ = np.linalg.qr(np.column_stack([jg.T, np.eye(4)]))
    t1, t2 = q[:, 2], q[:, 3]
    found, seeds = [], []
    for rad in radii:
        for k in range(n_dir):
            ang = 2 * math.pi * k / n_dir
            y0 = _retract(S, center + rad * (math.cos(ang) * t1 + math.sin(ang) * t2))
            if y0 is None:
                continue
            c = _critical_point(S, level, level_grad, y0)
            if c is None or np.linalg.norm(c - center) < 1e-6:
                continue
            if np.linalg.norm(c - center) > 4 * max(radii):
                continue
            if any(np.linalg.norm(c - f) < 1e-8 for f in found):
                continue
            found.append(c)
            seed = _seed_between(S, level, c, center, samples=64)
            if seed is not None:
                seeds.append(seed)
    return seeds


def _seed_between(S, level, c, q, samples=24, iters=40):
    fc = level(c)
    prev_t = 0.0
    for k in range(1, samples + 1):
        t = k / samples
        y = _retract(S, c + t * (q - c))
        if y is None:
            return None
        if level(y) * fc < 0:
            lo, hi = prev_t, t
            for _ in range(iters):
                mid = 0.5 * (lo + hi)
                ym = _retract(S, c + mid * (q - c))
                if ym is None:
                    return None
                if level(ym) * fc > 0:
                    lo = mid
                else:
                    hi = mid
            return _retract(S, c + 0.5 * (lo + hi) * (q - c))
        prev_t = t
    return None


def trace_on_spheres(S, level, level_grad, level_grid, marked=(), policy=None, grid=(48, 48),
                     extra_seeds=(), spheres=(1, 2)):
    """Trace the zero set of ``level`` on the chosen spheres.

    Returns ``{which: [TraceComponent, ...]}``. Marked points must be given in
    slice coordinates (u, v, x3, x4).
    """
    system = sphere_system(S, level, level_grad)
    out = {}
    for which in spheres:
        mk = [m for m in marked if (m.location[3] > 0) == (which == 1)]
        seeds = [s for s in extra_seeds if (np.asarray(s[0] if isinstance(s, tuple) else s)[3] > 0) == (which == 1)]
        seeds += sphere_seeds(S, which, level, level_grad, level_grid, *grid,
                              exclude=[m.location for m in mk])
        out[which] = trace_level_set(system, seeds, policy, mk)
    return out, system


def point_slice(w):
    return slice_of(w)


# ---------------------------------------------------------------------------
# export


def components_to_rows(components, label=""):
    """Rows (label, component, index, coords..., arc-length parameter)."""
    rows = []
    for ci, comp in enumerate(components):
        s = comp.arc_parameter()
        for i, p in enumerate(comp.points):
            rows.append([label, ci, i, *[float(v) for v in p], float(s[i])])
    return rows
