"""The Segre quartic surface S = {Q_A = Q_B = 0} in CP4 and its derived loci.

    Q_A = X0 X1 + alpha X2^2 - beta X3^2 - gamma X4^2
    Q_B = X2^2 - X3^2 - X4^2

The projection f = (X2 : X3 : X4) maps S onto the conic Lambda = {Q_B = 0}
in CP2, and its fibres are the conics X0 X1 = -(alpha X2^2 - beta X3^2 - gamma X4^2).
With a = gamma - beta, b = gamma - alpha, c = alpha - beta, the fibre splits
into two lines over the four discriminant points (+-sqrt a, +-sqrt b, +-sqrt c).

The real locus (for gamma > alpha > beta) is two 2-spheres. Each sphere is
handled as the constraint surface

    u^2 + v^2 + alpha - beta x3^2 - gamma x4^2 = 0,   x3^2 + x4^2 = 1

in the affine slice x2 = 1 of real-form coordinates, which stays regular at
the poles where the fibre circle shrinks to a point.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateParams,
    ExactModeUnavailable,
    IndeterminacyPoint,
    NoSpheres,
    NotOnSurface,
    PoleChartDegenerate,
)
from .scalar_geometry import (
    PROJ_TOL,
    ProjPoint,
    QuadricForm,
    complexify,
    real_form,
    to_exact,
)

DEFAULT_PARAMS = (16, 0, 25)
SURFACE_TOL = 1e-9


def _exact_sqrt(q):
    """Rational square root of a non-negative Fraction, or None."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class SurfaceParams:
    alpha: object
    beta: object
    gamma: object
    mode: str = "approx"

    @property
    def a(self):
        return self.gamma - self.beta

    @property
    def b(self):
        return self.gamma - self.alpha

    @property
    def c(self):
        return self.alpha - self.beta

    @property
    def orientation(self):
        if self.gamma > self.alpha > self.beta:
            return "normal"
        if self.gamma < self.alpha < self.beta:
            return "reversed"
        return "none"

    def floats(self):
        return float(self.alpha), float(self.beta), float(self.gamma)


@dataclass(frozen=True)
class BranchDivisor:
    """B_j in CP3: the quadric Q_j cut by the cone Q_B with X_j dropped.

    ``factors`` are the two linear forms (coefficients on the four remaining
    coordinates) whose product is that cone.
    """

    j: int
    quadric: QuadricForm
    cone: QuadricForm
    factors: tuple
    reduced: tuple  # (index k in CP3 coordinates, coefficient) of X0X1 + coef*X_k^2


@dataclass(frozen=True)
class SegreSurface:
    params: SurfaceParams
    source_params: SurfaceParams
    permutation: tuple  # canonical coordinate i holds source coordinate permutation[i]
    mode: str
    has_spheres: bool
    QA: QuadricForm
    QB: QuadricForm
    A_real: np.ndarray
    B_real: np.ndarray
    nodes: tuple
    sqrt_abc: tuple
    lambdas: tuple
    poles: tuple
    lines: dict = field(repr=False)
    quadrics: dict = field(repr=False)
    branch: dict = field(repr=False)

    @property
    def alpha(self):
        return float(self.params.alpha)

    @property
    def beta(self):
        return float(self.params.beta)

    @property
    def gamma(self):
        return float(self.params.gamma)

    def FA(self, w):
        """Q_A in real-form coordinates (works for complex w too)."""
        w = np.asarray(w)
        return w @ self.A_real @ w

    def FB(self, w):
        w = np.asarray(w)
        return w @ self.B_real @ w

    def contains_real(self, w, tol=SURFACE_TOL):
        w = np.asarray(w, dtype=float)
        scale = float(np.dot(w, w)) * max(1.0, abs(self.alpha), abs(self.beta), abs(self.gamma))
        return abs(self.FA(w)) <= tol * scale and abs(self.FB(w)) <= tol * scale

    def contains(self, p, tol=SURFACE_TOL):
        if p.mode == "exact" and self.mode == "exact":
            return self.QA.evaluate(p) == 0 and self.QB.evaluate(p) == 0
        x = p.array()
        scale = float(np.vdot(x, x).real) * max(1.0, abs(self.alpha), abs(self.beta), abs(self.gamma))
        return abs(self.QA.evaluate(x)) <= tol * scale and abs(self.QB.evaluate(x)) <= tol * scale

    def require_spheres(self):
        if not self.has_spheres:
            raise NoSpheres("the real locus of this surface contains no spheres")

    def to_canonical(self, coords):
        """Reorder source coordinates into the canonical (gamma > alpha > beta) frame."""
        return tuple(coords[i] for i in self.permutation)

    def from_canonical(self, coords):
        out = [None] * len(coords)
        for i, src in enumerate(self.permutation):
            out[src] = coords[i]
        return tuple(out)


def _diag_quadrics(alpha, beta, gamma, mode):
    zero, half = (Fraction(0), Fraction(1, 2)) if mode == "exact" else (0.0, 0.5)
    one = Fraction(1) if mode == "exact" else 1.0

    def mat(d2, d3, d4, x01):
        m = [[zero] * 5 for _ in range(5)]
        m[0][1] = m[1][0] = x01
        m[2][2], m[3][3], m[4][4] = d2, d3, d4
        return m

    qa = QuadricForm(mat(alpha, -beta, -gamma, half), mode)
    qb = QuadricForm(mat(one, -one, -one, zero), mode)
    return qa, qb


def build_surface(alpha=16, beta=0, gamma=25, mode="approx"):
    """Construct S for parameters (alpha, beta, gamma).

    Reversed orientation (gamma < alpha < beta) is turned into the normal one
    by exchanging X3 and X4 (which maps the surface for (alpha, beta, gamma)
    onto the one for (alpha, gamma, beta)); the permutation is recorded.
    Parameters satisfying neither ordering give a surface flagged without
    spheres.
    """
    if mode == "exact":
        al, be, ga = (to_exact(x) for x in (alpha, beta, gamma))
    elif mode == "approx":
        al, be, ga = float(alpha), float(beta), float(gamma)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if al == be or be == ga or al == ga:
        raise DegenerateParams(f"alpha, beta, gamma must be distinct, got {(alpha, beta, gamma)}")
    source = SurfaceParams(al, be, ga, mode)
    permutation = (0, 1, 2, 3, 4)
    params = source
    if source.orientation == "reversed":
        params = SurfaceParams(al, ga, be, mode)
        permutation = (0, 1, 2, 4, 3)
    has_spheres = params.orientation == "normal"
    a, b, c = params.a, params.b, params.c

    if mode == "exact":
        roots = tuple(_exact_sqrt(x) for x in (a, b, c))
        if any(r is None for r in roots):
            raise ExactModeUnavailable(
                f"sqrt of (a, b, c) = ({a}, {b}, {c}) is not rational; use approx mode")
    else:
        roots = tuple(complex(x) ** 0.5 for x in (a, b, c))
        if all(abs(r.imag) == 0 for r in roots):
            roots = tuple(r.real for r in roots)
    ra, rb, rc = roots

    lam = (
        ProjPoint((ra, rb, rc), mode),
        ProjPoint((ra, -rb, rc), mode),
        ProjPoint((-ra, rb, rc), mode),
        ProjPoint((ra, rb, -rc), mode),
    )
    zero = Fraction(0) if mode == "exact" else 0.0
    one = Fraction(1) if mode == "exact" else 1.0
    e0 = ProjPoint((one, zero, zero, zero, zero), mode)
    e1 = ProjPoint((zero, one, zero, zero, zero), mode)
    poles = tuple(ProjPoint((zero, zero, *l.coords), mode) for l in lam)
    lines = {}
    for i, p in enumerate(poles, start=1):
        lines[f"l{i}"] = (e0, p)
        lines[f"lbar{i}"] = (e1, p)

    qa, qb = _diag_quadrics(params.alpha, params.beta, params.gamma, mode)
    kappas = {2: params.alpha, 3: params.beta, 4: params.gamma}
    quadrics, branch = {}, {}
    for j, kap in kappas.items():
        keep = [i for i in range(5) if i != j]
        full_a = qa.matrix if mode == "exact" else qa.array().real
        full_b = qb.matrix if mode == "exact" else qb.array().real
        qj = [[full_a[r][s] - kap * full_b[r][s] for s in keep] for r in keep]
        cone = [[full_b[r][s] for s in keep] for r in keep]
        quadrics[j] = QuadricForm(qj, mode)
        cone_q = QuadricForm(cone, mode)
        # the cone is d_k X_k^2 + d_l X_l^2 on the two surviving fibre coordinates
        k, l = 2, 3
        dk, dl = cone[k][k], cone[l][l]
        ratio = cmath.sqrt(complex(-dl / dk))
        if mode == "exact":
            r_ex = _exact_sqrt(-dl / dk)
            fac = ((0, 0, 1, -r_ex), (0, 0, 1, r_ex)) if r_ex is not None else \
                ((0, 0, 1, -ratio), (0, 0, 1, ratio))
        else:
            fac = ((0, 0, 1, -ratio), (0, 0, 1, ratio))
        # on the cone X_k^2 = (-dl/dk) X_l^2, so Q_j reduces to X0X1 + (qk*(-dl/dk) + ql) X_l^2
        qk, ql = qj[k][k], qj[l][l]
        red = (l, qk * (-dl / dk) + ql)
        branch[j] = BranchDivisor(j, quadrics[j], cone_q, fac, red)

    A_real = np.diag([1.0, 1.0, float(params.alpha), -float(params.beta), -float(params.gamma)])
    B_real = np.diag([0.0, 0.0, 1.0, -1.0, -1.0])
    return SegreSurface(
        params=params, source_params=source, permutation=permutation, mode=mode,
        has_spheres=has_spheres, QA=qa, QB=qb, A_real=A_real, B_real=B_real,
        nodes=(e0, e1), sqrt_abc=roots, lambdas=lam, poles=poles, lines=lines,
        quadrics=quadrics, branch=branch,
    )


def default_surface(mode="approx"):
    return build_surface(*DEFAULT_PARAMS, mode=mode)


# ---------------------------------------------------------------------------
# conic bundle structure


def conic_angle(lam):
    """Angle theta of a real point of Lambda written as (1, cos theta, sin theta)."""
    x = np.array([complex(v) for v in lam], dtype=complex)
    if np.max(np.abs(x.imag)) > 1e-12 * np.max(np.abs(x)):
        raise ValueError("point of Lambda is not real")
    x = x.real / x.real[0]
    return math.atan2(x[2], x[1]) % (2 * math.pi)


def discriminant_points(S):
    """lambda_1..lambda_4, with lambda_i adjacent to lambda_{i+1} on the real conic."""
    return list(S.lambdas)


def discriminant_angles(S):
    S.require_spheres()
    return [conic_angle(l) for l in S.lambdas]


def project_f(S, p, tol=PROJ_TOL):
    x = p.coords[2:]
    if p.mode == "exact":
        if all(v == 0 for v in x):
            raise IndeterminacyPoint("f is undefined at the nodes")
    elif np.max(np.abs(np.array(x, dtype=complex))) <= tol * np.max(np.abs(p.array())):
        raise IndeterminacyPoint("f is undefined at the nodes")
    return ProjPoint(x, p.mode)


def lambda_phi(S, lam):
    """alpha x2^2 - beta x3^2 - gamma x4^2 at a conic point (normalized x2 = 1 when real)."""
    x = lam.coords
    if lam.mode == "exact" and S.mode == "exact":
        x2, x3, x4 = x[0], x[1], x[2]
        return (S.params.alpha * x2 * x2 - S.params.beta * x3 * x3 - S.params.gamma * x4 * x4) / (x2 * x2)
    x = np.array([complex(v) for v in x])
    x = x / x[0]
    return complex(S.alpha * x[0] ** 2 - S.beta * x[1] ** 2 - S.gamma * x[2] ** 2).real


@dataclass(frozen=True)
class FiberLocus:
    kind: str  # "empty" | "point" | "circle"
    radius: float = 0.0
    point: object = None


def fiber_real_locus(S, lam, tol=1e-12):
    """Real points of the fibre f^{-1}(lam) for a real point lam of Lambda."""
    x = lam.coords
    if lam.mode == "exact" and S.mode == "exact":
        if x[0] * x[0] - x[1] * x[1] - x[2] * x[2] != 0:
            raise ValueError("point is not on Lambda")
        r2 = -lambda_phi(S, lam)
        if r2 > 0:
            return FiberLocus("circle", math.sqrt(r2))
        if r2 == 0:
            return FiberLocus("point", 0.0, ProjPoint((0, 0, *x), "exact"))
        return FiberLocus("empty")
    arr = np.array([complex(v) for v in x])
    if np.max(np.abs(arr.imag)) > 1e-12 * np.max(np.abs(arr)) or abs(arr[0]) == 0:
        raise ValueError("point is not a real point of Lambda")
    arr = arr.real / arr.real[0]
    if abs(arr[0] ** 2 - arr[1] ** 2 - arr[2] ** 2) > 1e-9:
        raise ValueError("point is not on Lambda")
    r2 = -lambda_phi(S, lam)
    scale = max(abs(S.alpha), abs(S.beta), abs(S.gamma), 1.0)
    if r2 > tol * scale:
        return FiberLocus("circle", math.sqrt(r2))
    if r2 >= -tol * scale:
        return FiberLocus("point", 0.0, ProjPoint((0, 0, *arr)))
    return FiberLocus("empty")


# ---------------------------------------------------------------------------
# coverings pi_j, quadrics Q_j, involutions tau_j


def _check_j(j):
    if j not in (2, 3, 4):
        raise ValueError("j must be 2, 3 or 4")


def quadric_Q(S, j):
    _check_j(j)
    return S.quadrics[j]


def quadric_real_type(S, j):
    """'sphere', 'empty' or 'torus' for the real locus of X0X1 + s X_k^2 + t X_l^2."""
    m = S.quadrics[j].matrix
    s, t = float(m[2][2]), float(m[3][3])
    if s * t < 0:
        return "sphere"
    if s > 0 and t > 0:
        return "empty"
    return "torus"


def branch_divisor(S, j):
    _check_j(j)
    return S.branch[j]


def is_on_branch(S, j, q, tol=SURFACE_TOL):
    """Membership of a point q of CP3 in B_j."""
    _check_j(j)
    bd = S.branch[j]
    if q.mode == "exact" and S.mode == "exact":
        return bd.quadric.evaluate(q) == 0 and bd.cone.evaluate(q) == 0
    x = q.array()
    scale = float(np.vdot(x, x).real) * max(1.0, abs(S.alpha), abs(S.beta), abs(S.gamma))
    return abs(bd.quadric.evaluate(x)) <= tol * scale and abs(bd.cone.evaluate(x)) <= tol * scale


def involution_tau(j, p):
    _check_j(j)
    c = list(p.coords)
    c[j] = -c[j]
    return type(p)(c, p.mode)


def project_pi(j, p):
    _check_j(j)
    return ProjPoint([x for i, x in enumerate(p.coords) if i != j], p.mode)


def _real_solution_space(factor):
    """Real basis of {y in R^4 : sum factor_i * Y_i = 0} in real-form CP3 coords.

    CP3 coordinates are (X0, X1, X_k, X_l); real form (u, v, x_k, x_l). The
    branch factors only involve X_k, X_l.
    """
    f = np.array([complex(x) for x in factor])
    rows = []
    # X0 = u + iv, X1 = u - iv
    lin = np.array([f[0] + f[1], 1j * (f[0] - f[1]), f[2], f[3]])
    rows.append(lin.real)
    rows.append(lin.imag)
    m = np.array(rows)
    _, s, vh = np.linalg.svd(m)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    return vh[rank:]


def _classify_restricted(basis, diag):
    if basis.shape[0] == 0:
        return "empty"
    g = basis @ np.diag(diag) @ basis.T
    ev = np.linalg.eigvalsh(g)
    tol = 1e-10 * max(1.0, np.max(np.abs(ev)))
    pos, neg = int(np.sum(ev > tol)), int(np.sum(ev < -tol))
    dim = basis.shape[0]
    if pos == 0 or neg == 0:
        # semidefinite: only the kernel directions are real solutions
        zero = dim - pos - neg
        return "empty" if zero == 0 else f"degenerate(kernel={zero})"
    if dim == 3:
        return "circle" if pos + neg == 3 else "line-pair"
    if dim == 2:
        return "two-points"
    return "other"


def branch_real_locus(S, j):
    """Real-locus type of each component of B_j and of their intersection."""
    bd = S.branch[j]
    diag = [1.0, 1.0] + [float(bd.quadric.matrix[i][i]) for i in (2, 3)]
    out = []
    spaces = []
    for fac in bd.factors:
        basis = _real_solution_space(fac)
        spaces.append(basis)
        out.append(_classify_restricted(basis, diag))
    both = np.vstack([_real_solution_space(bd.factors[0]), _real_solution_space(bd.factors[1])])
    if both.size:
        # intersection of the two real subspaces = complement of the sum of their complements
        comp = []
        for fac in bd.factors:
            f = np.array([complex(x) for x in fac])
            lin = np.array([f[0] + f[1], 1j * (f[0] - f[1]), f[2], f[3]])
            comp.extend([lin.real, lin.imag])
        _, s, vh = np.linalg.svd(np.array(comp))
        rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
        meet = _classify_restricted(vh[rank:], diag)
    else:
        meet = "empty"
    return {"components": out, "intersection": meet}


def cstar_action(p, t):
    """(X0, X1, ...) -> (t X0, X1 / t, ...); preserves S, fixes the p_i."""
    c = list(p.coords)
    c[0] = c[0] * t
    c[1] = c[1] / t
    return type(p)(c, p.mode)


def rotate_real(w, s):
    """The unit-circle part of the C*-action on real-form coordinates."""
    w = np.array(w, dtype=float)
    cs, sn = math.cos(s), math.sin(s)
    u, v = w[0], w[1]
    w[0], w[1] = cs * u - sn * v, sn * u + cs * v
    return w


# ---------------------------------------------------------------------------
# the two real spheres


@dataclass(frozen=True)
class SphereChart:
    which: int
    theta_bounds: tuple
    pole_indices: tuple  # indices (0-based) into S.poles at theta_bounds[0], theta_bounds[1]
    alpha: float
    beta: float
    gamma: float

    def r2(self, theta):
        return self.beta * np.cos(theta) ** 2 + self.gamma * np.sin(theta) ** 2 - self.alpha

    def radius(self, theta):
        return np.sqrt(np.maximum(self.r2(theta), 0.0))


def sphere_chart(S, which):
    S.require_spheres()
    ang = discriminant_angles(S)
    if which in (1, "S1"):
        return SphereChart(1, (ang[0], ang[1]), (0, 1), S.alpha, S.beta, S.gamma)
    if which in (2, "S2"):
        return SphereChart(2, (ang[2], ang[3]), (2, 3), S.alpha, S.beta, S.gamma)
    raise ValueError("which must be 1 or 2")


def sphere_point_real(chart, theta, phi):
    """Real-form vector over the conic point at theta with fibre angle phi."""
    lo, hi = chart.theta_bounds
    if not lo - 1e-12 <= theta <= hi + 1e-12:
        raise NotOnSurface(f"theta={theta} outside the arc [{lo}, {hi}]")
    r2 = chart.r2(theta)
    if r2 <= 1e-14 * max(1.0, chart.gamma):
        raise PoleChartDegenerate("the (theta, phi) chart degenerates at the poles")
    r = math.sqrt(r2)
    return np.array([r * math.cos(phi), r * math.sin(phi), 1.0, math.cos(theta), math.sin(theta)])


def sphere_point(chart, theta, phi):
    return complexify(sphere_point_real(chart, theta, phi))


def sphere_grid(chart, n_theta, n_phi, margin=0.0):
    """Real-form points on an interior (theta, phi) grid; returns (thetas, phis, points)."""
    lo, hi = chart.theta_bounds
    thetas = lo + (hi - lo) * (np.arange(n_theta) + 0.5) / n_theta
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    r = chart.radius(th)
    pts = np.stack([r * np.cos(ph), r * np.sin(ph), np.ones_like(th), np.cos(th), np.sin(th)], axis=-1)
    return thetas, phis, pts


def normalize_real(S, p):
    """Real-form vector of p scaled so that x2 = 1 (x2 never vanishes on the real locus)."""
    if isinstance(p, ProjPoint):
        w = np.array([float(x) for x in real_form(p)], dtype=float)
    else:
        w = np.array(p, dtype=float)
    if abs(w[2]) <= 1e-12 * np.max(np.abs(w)):
        raise NotOnSurface("x2 = 0 does not meet the real locus")
    return w / w[2]


def sphere_membership(S, p, tol=1e-8):
    """1 or 2 for the sphere containing the real point p, None if p is not on S^sigma."""
    S.require_spheres()
    try:
        w = normalize_real(S, p)
    except Exception:
        return None
    if not S.contains_real(w, tol):
        return None
    return 1 if w[4] > 0 else 2


def slice_of(w):
    """(u, v, x3, x4) of a real-form vector normalized to x2 = 1."""
    w = np.asarray(w, dtype=float)
    return np.array([w[0], w[1], w[3], w[4]]) / w[2]


def unslice(y):
    y = np.asarray(y)
    return np.array([y[0], y[1], 1.0, y[2], y[3]], dtype=y.dtype if np.iscomplexobj(y) else float)


def unslice_direction(d):
    d = np.asarray(d)
    return np.array([d[0], d[1], 0.0, d[2], d[3]])


def sphere_constraints(S, y):
    """The two constraint values at slice coordinates y = (u, v, x3, x4)."""
    u, v, x3, x4 = y
    return np.array([u * u + v * v + S.alpha - S.beta * x3 * x3 - S.gamma * x4 * x4,
                     1.0 - x3 * x3 - x4 * x4])


def sphere_constraint_jacobian(S, y):
    u, v, x3, x4 = y
    return np.array([[2 * u, 2 * v, -2 * S.beta * x3, -2 * S.gamma * x4],
                     [0.0, 0.0, -2 * x3, -2 * x4]])


def sphere_tangent_basis(S, p, tol=1e-8):
    """(P, t1, t2): P normalized to x2 = 1, and an oriented orthonormal basis
    (t1, t2) of the real tangent plane, embedded as real-form vectors with
    zero x2 component.

    Orientation: det[n1, n2, t1, t2] > 0 in slice coordinates, where n1, n2
    are the constraint gradients. The basis is deterministic.
    """
    S.require_spheres()
    w = normalize_real(S, p)
    if not S.contains_real(w, tol):
        raise NotOnSurface(f"{w} is not on the real locus")
    y = slice_of(w)
    n = sphere_constraint_jacobian(S, y)
    q, _ = np.linalg.qr(n.T)
    proj = np.eye(4) - q @ q.T
    cols = proj.copy()
    order = np.argsort(-np.linalg.norm(cols, axis=0), kind="stable")
    t1 = cols[:, order[0]] / np.linalg.norm(cols[:, order[0]])
    best = None
    for k in order[1:]:
        c = cols[:, k] - np.dot(cols[:, k], t1) * t1
        nc = np.linalg.norm(c)
        if best is None or nc > best[0] + 1e-12:
            best = (nc, c)
    t2 = best[1] / best[0]
    if np.linalg.det(np.column_stack([n[0], n[1], t1, t2])) < 0:
        t2 = -t2
    return w, unslice_direction(t1), unslice_direction(t2)


# ---------------------------------------------------------------------------
# serialization


def _num(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, complex):
        if x.imag == 0:
            return float(x.real)
        return [float(x.real), float(x.imag)]
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _pt(p):
    return [_num(c) for c in p.coords]


def surface_to_json(S):
    """Plain dict describing the surface and its derived loci."""
    doc = {
        "params": {"alpha": _num(S.source_params.alpha), "beta": _num(S.source_params.beta),
                   "gamma": _num(S.source_params.gamma)},
        "mode": S.mode,
        "orientation": S.source_params.orientation,
        "canonicalParams": {"alpha": _num(S.params.alpha), "beta": _num(S.params.beta),
                            "gamma": _num(S.params.gamma)},
        "coordinatePermutation": list(S.permutation),
        "abc": [_num(S.params.a), _num(S.params.b), _num(S.params.c)],
        "sqrtAbc": [_num(r) for r in S.sqrt_abc],
        "realLocus": "two-spheres" if S.has_spheres else "none-or-torus",
        "sphereOpsEnabled": S.has_spheres,
        "nodes": [_pt(e) for e in S.nodes],
        "discriminantPoints": [_pt(l) for l in S.lambdas],
        "poles": [_pt(p) for p in S.poles],
        "lines": {k: {"through": [_pt(a), _pt(b)]} for k, (a, b) in S.lines.items()},
        "quadrics": {},
        "branchDivisors": {},
    }
    if S.has_spheres:
        doc["discriminantAngles"] = discriminant_angles(S)
        doc["sphereArcs"] = {
            "S1": {"thetaBounds": list(sphere_chart(S, 1).theta_bounds), "poles": ["p1", "p2"]},
            "S2": {"thetaBounds": list(sphere_chart(S, 2).theta_bounds), "poles": ["p3", "p4"]},
        }
    for j in (2, 3, 4):
        m = S.quadrics[j].matrix
        doc["quadrics"][f"Q{j}"] = {
            "droppedCoordinate": j,
            "diagonal": [_num(m[i][i]) for i in range(4)],
            "x0x1Coefficient": _num(2 * m[0][1]),
            "realType": quadric_real_type(S, j),
        }
        bd = S.branch[j]
        entry = {
            "reducedEquation": {"x0x1": 1, "index": bd.reduced[0], "coefficient": _num(bd.reduced[1])},
            "linearFactors": [[_num(c) for c in f] for f in bd.factors],
        }
        if S.has_spheres:
            entry["realLocus"] = branch_real_locus(S, j)
        doc["branchDivisors"][f"B{j}"] = entry
    return doc
