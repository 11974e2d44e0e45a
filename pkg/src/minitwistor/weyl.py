"""The three-manifold W of real minitwistor lines, its conformal structure
and its space-like geodesics.

A point of W is a real hyperplane H = {h = 0} with

    h = 2 (A - kappa B) P,   P on the first sphere,   alpha < kappa < gamma,

that is, a member of the arc J4 of the tangent pencil at P. The fibre
coordinate is s = (kappa - alpha) / (gamma - alpha). The same formula covers
the two poles, where H contains the pair of lines through the pole and cuts
the surface in those lines plus one fibre conic.

Tangent vectors at H are real linear forms dh with dh(P) = 0, modulo h. For
each such dh the restriction to the normalized curve is a quadratic Q_dh(t);
its discriminant is a quadratic form in dh whose sign separates space-like
(two real residual points), time-like (conjugate pair) and null (double point)
directions.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DeflationFailure,
    FiberBoundary,
    NotInW,
    NotOnSurface,
    ProjectionDegenerate,
    SignatureMismatch,
)
from .pencil import _as_real, _as_real_hyperplane, is_pole, other_conic_point, tangency_points
from .scalar_geometry import fit_quadratic_form
from .segre import (
    rotate_real,
    slice_of,
    sphere_chart,
    sphere_membership,
    sphere_point_real,
    sphere_tangent_basis,
)
from .tracer import (
    StepPolicy,
    sphere_seeds,
    sphere_system,
    trace_level_set,
)

S_EPS = 1e-9  # geodesic samples with s outside (S_EPS, 1 - S_EPS) are flagged
NULL_BAND = 1e-10


def _pole_vectors(S):
    out = []
    for pt in S.poles:
        v = np.array([complex(x) for x in pt.coords]).real
        out.append(v / v[2])
    return out


def pole_index(S, w, tol=1e-12):
    """0 or 1 when w is the pole p1 or p2 of the first sphere, else None."""
    if not is_pole(S, w):
        return None
    poles = _pole_vectors(S)
    for i in (0, 1):
        if np.max(np.abs(poles[i] - w)) <= max(tol, 1e-9):
            return i
    return None


@dataclass(frozen=True)
class WPoint:
    p: np.ndarray  # real-form node on the first sphere, x2 = 1
    s: float
    kappa: float
    h: np.ndarray  # unit real-form coefficients of H
    regular: bool
    pole: int | None = None

    def to_json(self):
        return {"p": [float(x) for x in self.p], "s": self.s, "kappa": self.kappa,
                "h": [float(x) for x in self.h], "regular": self.regular,
                "pole": None if self.pole is None else self.pole + 1}


def kappa_of_s(S, s):
    return S.alpha + s * (S.gamma - S.alpha)


def s_of_kappa(S, kappa):
    return (kappa - S.alpha) / (S.gamma - S.alpha)


def _hyperplane(S, P, kappa):
    h = 2 * (S.A_real - kappa * S.B_real) @ P
    return h / np.linalg.norm(h)


def w_chart(S, p, s):
    """The point of W with node p and fibre coordinate s in (0, 1)."""
    if not 0.0 < s < 1.0:
        raise FiberBoundary(f"s={s} is outside the open interval (0, 1)")
    w = _as_real(S, p)
    if sphere_membership(S, w) != 1:
        raise NotOnSurface("the node of a point of W lies on the first sphere")
    kap = kappa_of_s(S, s)
    idx = pole_index(S, w)
    if idx is not None:
        w = _pole_vectors(S)[idx]
    return WPoint(w, float(s), kap, _hyperplane(S, w, kap), idx is None, idx)


def pole_hyperplane(S, i, lam):
    """Real form of f^{-1}(line through lambda_i and lam); i is 0 or 1."""
    li = _pole_vectors(S)[i][2:]
    lam = np.asarray(lam, dtype=float)
    line = np.cross(li, lam)
    return np.array([0.0, 0.0, *line])


def w_locate(S, h, tol=1e-9):
    """(p, s) of the point of W whose hyperplane is h, or NotInW."""
    r = _as_real_hyperplane(h)
    al, be, ga = S.alpha, S.beta, S.gamma
    if math.hypot(r[0], r[1]) <= 1e-12:
        line = r[2:]
        poles = _pole_vectors(S)
        on = [i for i, pv in enumerate(poles) if abs(line @ pv[2:]) <= tol * np.linalg.norm(pv[2:])]
        if len(on) != 1 or on[0] not in (0, 1):
            raise NotInW("hyperplane through the nodes is not an irregular member of W")
        i = on[0]
        x = poles[i][2:]
        # line ~ c (alpha x2, -beta x3, -gamma x4) - c kappa (x2, -x3, -x4)
        m = np.column_stack([np.array([al * x[0], -be * x[1], -ga * x[2]]), -np.array([x[0], -x[1], -x[2]])])
        coef, *_ = np.linalg.lstsq(m, line, rcond=None)
        if np.linalg.norm(m @ coef - line) > 1e-8 * np.linalg.norm(line) or abs(coef[0]) < 1e-14:
            raise NotInW("line does not belong to the pencil at the pole")
        kap = coef[1] / coef[0]
        s = s_of_kappa(S, kap)
        if not tol < s < 1 - tol:
            raise NotInW(f"fibre coordinate {s} outside (0, 1)")
        return w_chart(S, poles[i], s)
    cands = []
    for sp in tangency_points(S, r):
        if not sp.real or sp.sphere != 1 or isinstance(sp.kappa, complex) or math.isinf(sp.kappa):
            continue
        s = s_of_kappa(S, sp.kappa)
        if tol < s < 1 - tol:
            cands.append((sp.point, s))
    if not cands:
        raise NotInW("no node on the first sphere with kappa in (alpha, gamma)")
    if len(cands) > 1:
        raise NotInW(f"{len(cands)} candidate nodes; the hyperplane is not a minitwistor line")
    P, s = cands[0]
    w = w_chart(S, P, s)
    if abs(abs(w.h @ r) - 1.0) > 1e-8:
        raise NotInW("located chart point does not reproduce the hyperplane")
    return w


# ---------------------------------------------------------------------------
# tangent spaces


def _complement_basis(constraints, first=None):
    """Orthonormal basis of the orthogonal complement of ``constraints`` in R^5,
    starting with the projection of ``first`` when given."""
    c = np.atleast_2d(np.asarray(constraints, dtype=float))
    q, _ = np.linalg.qr(c.T)
    proj = np.eye(5) - q @ q.T
    basis = []
    if first is not None:
        v = proj @ first
        basis.append(v / np.linalg.norm(v))
    cols = list(np.argsort(-np.linalg.norm(proj, axis=0), kind="stable"))
    dim = 5 - np.linalg.matrix_rank(c)
    while len(basis) < dim:
        best = None
        for k in cols:
            v = proj[:, k].copy()
            for b in basis:
                v -= (v @ b) * b
            nv = np.linalg.norm(v)
            if best is None or nv > best[0] + 1e-12:
                best = (nv, v)
        basis.append(best[1] / best[0])
    return np.array(basis)


def tangent_basis_at(S, w):
    """Three real forms dh (rows) with dh(P) = 0 and dh orthogonal to h; the
    first is the fibre direction d h / d kappa = -2 B P (projected)."""
    fiber = -2 * S.B_real @ w.p
    return _complement_basis(np.vstack([w.p, w.h]), first=fiber)


# ---------------------------------------------------------------------------
# rational parametrization of the minitwistor line


@dataclass(frozen=True)
class NodalQuartic:
    """Normalization of S n H as a polynomial map t -> X(t) (real-form coords).

    regular: X has degree 4 and X(t') = X(t'') = node, where ell(t') = ell(t'') = 0;
    irregular: X has degree 2 and parametrizes the conic component; the two
    lines through the pole are kept in ``lines``.
    """

    kind: str
    X_coeffs: np.ndarray  # (deg+1, 5), ascending powers
    node: np.ndarray
    ell_coeffs: np.ndarray | None  # regular only, ascending
    node_params: tuple
    z_coeffs: np.ndarray | None = None
    conic_lambda: np.ndarray | None = None
    lines: tuple = ()

    def X(self, t):
        t = np.asarray(t)
        powers = np.stack([t ** k for k in range(self.X_coeffs.shape[0])], axis=-1)
        return powers @ self.X_coeffs

    def dX(self, t):
        k = np.arange(1, self.X_coeffs.shape[0])
        powers = np.stack([k[i] * np.asarray(t) ** (k[i] - 1) for i in range(len(k))], axis=-1)
        return powers @ self.X_coeffs[1:]


def _poly_mul(a, b):
    return np.polynomial.polynomial.polymul(a, b)


def parametrize_minitwistor(S, w):
    if not w.regular:
        return _parametrize_irregular(S, w)
    P, h = w.p, w.h
    E = _complement_basis(np.vstack([P, h])).T  # 5 x 3
    K = S.A_real - w.kappa * S.B_real
    M = E.T @ K @ E
    ev, V = np.linalg.eigh(M)
    scale = float(np.max(np.abs(ev)))
    npos = int(np.sum(ev > 1e-10 * scale))
    nneg = int(np.sum(ev < -1e-10 * scale))
    if npos + nneg < 3 or min(npos, nneg) != 1:
        raise ProjectionDegenerate(f"projected conic has eigenvalues {ev}")
    if npos == 1:
        ev, V = -ev[::-1], V[:, ::-1]
    # ev[0] < 0 < ev[1] <= ev[2]
    d3, d1, d2 = ev[0], ev[1], ev[2]
    va, vb, vc = V[:, 1], V[:, 2], V[:, 0]
    # z(t) = E V ((1 - t^2)/sqrt d1, 2t/sqrt d2, (1 + t^2)/sqrt(-d3))
    ca = E @ va / math.sqrt(d1)
    cb = E @ vb / math.sqrt(d2)
    cc = E @ vc / math.sqrt(-d3)
    z = np.array([ca + cc, 2 * cb, -ca + cc])  # ascending coefficients, each a 5-vector
    BP = S.B_real @ P
    ell = z @ BP
    fb = np.zeros(5)
    for i in range(3):
        for j in range(3):
            fb[i + j] += z[i] @ S.B_real @ z[j]
    X = np.zeros((5, 5))
    for k in range(5):
        X[k] -= fb[k] * P
    for i in range(3):
        for j in range(3):
            X[i + j] += 2 * ell[i] * z[j]
    roots = np.polynomial.polynomial.polyroots(ell)
    roots = tuple(sorted((complex(r) for r in roots), key=lambda c: (c.imag, c.real)))
    return NodalQuartic("regular", X, P, ell, roots, z_coeffs=z)


def _parametrize_irregular(S, w):
    P = w.p
    lam = other_conic_point(S, w.h[2:], P[2:])
    r2 = S.beta * lam[1] ** 2 + S.gamma * lam[2] ** 2 - S.alpha
    if r2 <= 0:
        raise ProjectionDegenerate("the fibre conic of an irregular point has no real circle")
    R = math.sqrt(r2)
    X = np.zeros((3, 5))
    X[0] = [R, 0.0, 1.0, lam[1], lam[2]]
    X[1] = [0.0, 2 * R, 0.0, 0.0, 0.0]
    X[2] = [-R, 0.0, 1.0, lam[1], lam[2]]
    # the lines l_i, lbar_i: spans of the pole with e0 and e1 (real form of e0 = (1, -i, 0, 0, 0)/2)
    e0 = np.array([0.5, -0.5j, 0, 0, 0])
    e1 = np.array([0.5, 0.5j, 0, 0, 0])
    return NodalQuartic("irregular", X, P, None, (), conic_lambda=lam, lines=((e0, P), (e1, P)))


def residual_divisor(S, w, dh, nq=None, tol=1e-9):
    """Ascending coefficients (q0, q1, q2) of the residual quadratic of dh."""
    nq = nq or parametrize_minitwistor(S, w)
    dh = np.asarray(dh, dtype=float)
    num = nq.X_coeffs @ dh
    if nq.kind == "irregular":
        if abs(dh @ nq.node) > tol * np.linalg.norm(dh) * np.linalg.norm(nq.node):
            raise DeflationFailure("dh does not vanish at the node")
        return num
    q, rem = np.polynomial.polynomial.polydiv(num, nq.ell_coeffs)
    size = max(float(np.max(np.abs(num))), 1e-300)
    if np.max(np.abs(rem)) > tol * size:
        raise DeflationFailure(f"dh o X is not divisible by the node factor (remainder {np.max(np.abs(rem)):.3g})")
    out = np.zeros(3)
    out[: len(q)] = q[:3]
    return out


def disc(q):
    return float(q[1] ** 2 - 4 * q[0] * q[2])


def direction_value(S, w, dh, nq=None):
    return disc(residual_divisor(S, w, dh, nq))


@dataclass(frozen=True)
class ConformalForm:
    basis: np.ndarray  # rows dh1, dh2, dh3
    G: np.ndarray
    residual: float
    signature: tuple  # (positive, negative, zero)

    @property
    def normalized(self):
        return self.G / abs(np.linalg.det(self.G)) ** (1.0 / 3.0)

    def value(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        return float(c @ self.G @ c)

    def to_json(self):
        return {"basis": self.basis.tolist(), "G": self.G.tolist(), "normalized": self.normalized.tolist(),
                "residual": self.residual, "signature": list(self.signature),
                "eigenvalues": np.linalg.eigvalsh(self.G).tolist()}


def conformal_form(S, w, basis=None, rng=None, checks=12, strict=True):
    """Quadratic form dh -> disc(Q_dh) on the tangent space at w.

    Assembled by polarization from the basis and the three pairwise sums,
    then checked against ``checks`` further directions.
    """
    nq = parametrize_minitwistor(S, w)
    basis = tangent_basis_at(S, w) if basis is None else np.asarray(basis, dtype=float)
    g = lambda c: direction_value(S, w, c @ basis, nq)  # noqa: E731
    G = np.zeros((3, 3))
    e = np.eye(3)
    for i in range(3):
        G[i, i] = g(e[i])
    for i in range(3):
        for j in range(i + 1, 3):
            G[i, j] = G[j, i] = 0.5 * (g(e[i] + e[j]) - G[i, i] - G[j, j])
    rng = rng if rng is not None else np.random.default_rng(0)
    dirs = rng.normal(size=(checks, 3))
    vals = np.array([g(d) for d in dirs])
    _, rel = fit_quadratic_form(np.vstack([e, dirs]), np.concatenate([np.diag(G), vals]))
    pred = np.einsum("ki,ij,kj->k", dirs, G, dirs)
    scale = np.linalg.norm(G) * np.einsum("ki,ki->k", dirs, dirs)
    resid = float(max(rel, np.max(np.abs(pred - vals) / scale)))
    ev = np.linalg.eigvalsh(G)
    band = 1e-12 * max(abs(ev[0]), abs(ev[-1]))
    sig = (int(np.sum(ev > band)), int(np.sum(ev < -band)), int(np.sum(np.abs(ev) <= band)))
    form = ConformalForm(basis, G, resid, sig)
    if strict and sig != (2, 1, 0):
        raise SignatureMismatch(f"signature {sig} at s={w.s}, eigenvalues {ev}")
    return form


def classify_direction(S, w, dh, nq=None, band=NULL_BAND):
    """'space', 'time' or 'null' from the sign of disc(Q_dh)."""
    dh = np.asarray(dh, dtype=float)
    dh = dh - (dh @ w.h) * w.h
    q = residual_divisor(S, w, dh, nq)
    val = disc(q)
    scale = float(q @ q)
    if abs(val) <= band * max(scale, 1e-300):
        return "null"
    return "space" if val > 0 else "time"


def fiber_direction_type(S, w):
    return classify_direction(S, w, tangent_basis_at(S, w)[0])


def null_direction(S, w, t0, nq=None):
    """dh vanishing at the node and doubly at the curve point of parameter t0."""
    nq = nq or parametrize_minitwistor(S, w)
    if nq.kind == "regular":
        z = nq.z_coeffs
        zt = z[0] + z[1] * t0 + z[2] * t0 * t0
        dz = z[1] + 2 * z[2] * t0
        rows = [w.p, zt, dz, w.h]
    else:
        rows = [w.p, nq.X(t0), nq.dX(t0), w.h]
    _, _, vh = np.linalg.svd(np.array(rows, dtype=float))
    return vh[-1]


# ---------------------------------------------------------------------------
# space-like geodesics


def geodesic_det(S, p, x, y):
    """det of the rows (P, t1, t2, x, y); vanishes iff a tangent hyperplane at p
    contains x and y."""
    P, t1, t2 = sphere_tangent_basis(S, p)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.linalg.det(np.vstack([P, t1, t2, x / x[2], y / y[2]])))


def incidence_function(S, x, y):
    """G(P) = A(P, x) B(P, y) - A(P, y) B(P, x) with its slice gradient and
    a vectorized grid evaluator.

    G vanishes exactly where some pencil member a A P + b B P contains x and
    y, so its zero set on the first sphere is that of geodesic_det; unlike the
    determinant it is a polynomial in the slice coordinates.
    """
    x = np.asarray(x, dtype=float) / x[2]
    y = np.asarray(y, dtype=float) / y[2]
    Ax, Bx, Ay, By = S.A_real @ x, S.B_real @ x, S.A_real @ y, S.B_real @ y
    keep = [0, 1, 3, 4]

    def full(yv):
        return np.array([yv[0], yv[1], 1.0, yv[2], yv[3]])

    def level(yv):
        P = full(yv)
        return float((Ax @ P) * (By @ P) - (Ay @ P) * (Bx @ P))

    def level_grad(yv):
        P = full(yv)
        g = Ax * (By @ P) + By * (Ax @ P) - Ay * (Bx @ P) - Bx * (Ay @ P)
        return g[keep]

    def level_grid(pts):
        return (pts @ Ax) * (pts @ By) - (pts @ Ay) * (pts @ Bx)

    return level, level_grad, level_grid


def lift_kappa(S, P, x, y):
    """kappa and h = 2(A - kappa B)P for a point P on the incidence curve."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    AP, BP = S.A_real @ P, S.B_real @ P
    m = np.array([[x @ AP, x @ BP], [y @ AP, y @ BP]])
    _, _, vh = np.linalg.svd(m)
    a, b = vh[-1]
    kap = -b / a if abs(a) > 1e-300 else math.inf
    return kap


@dataclass
class GeodesicSample:
    p: np.ndarray
    s: float
    h: np.ndarray
    g_tangent: float
    incidence: float  # max(|h(x)|, |h(y)|) relative
    node_error: float
    residual_error: float
    flagged: bool


@dataclass
class GeodesicTrace:
    x: np.ndarray
    y: np.ndarray
    components: list
    samples: list  # per component, list of GeodesicSample
    closed: list
    closure_gaps: list
    diameters: list
    empty: bool
    notes: list = field(default_factory=list)

    def summary(self):
        gs = [smp.g_tangent for comp in self.samples for smp in comp]
        return {
            "x": [float(v) for v in self.x], "y": [float(v) for v in self.y],
            "components": len(self.components), "closed": list(self.closed),
            "closureGaps": [float(v) for v in self.closure_gaps],
            "relativeGaps": [float(g / d) if d > 0 else None for g, d in zip(self.closure_gaps, self.diameters)],
            "arcLengths": [float(c.arc_length) for c in self.components],
            "empty": self.empty,
            "minGTangent": float(min(gs)) if gs else None,
            "maxIncidence": float(max((smp.incidence for c in self.samples for smp in c), default=0.0)),
            "maxNodeError": float(max((smp.node_error for c in self.samples for smp in c), default=0.0)),
            "maxResidualError": float(max((smp.residual_error for c in self.samples for smp in c), default=0.0)),
            "flagged": int(sum(smp.flagged for c in self.samples for smp in c)),
            "notes": list(self.notes),
        }


def _tangent_dh(S, P, dP, x, y, kap):
    """d/dtau of h = 2(A - kappa B)P along the incidence curve."""
    AP, BP = S.A_real @ P, S.B_real @ P
    z = x if abs(x @ BP) >= abs(y @ BP) else y
    # kappa = z.AP / z.BP along the curve
    num, den = z @ AP, z @ BP
    dk = ((z @ S.A_real @ dP) * den - num * (z @ S.B_real @ dP)) / den ** 2
    return 2 * (S.A_real - kap * S.B_real) @ dP - 2 * dk * BP


def _residual_points_error(S, w, dh, x, y, nq):
    """Distance of the residual points of dh from {x, y} (both normalized x2 = 1)."""
    q = residual_divisor(S, w, dh, nq)
    roots = np.roots(q[::-1])
    pts = []
    for t in roots:
        X = nq.X(complex(t))
        if abs(X[2]) < 1e-14:
            return math.inf
        pts.append(X / X[2])
    if len(pts) != 2:
        return math.inf
    a = [np.max(np.abs(pts[0] - x)), np.max(np.abs(pts[1] - y))]
    b = [np.max(np.abs(pts[0] - y)), np.max(np.abs(pts[1] - x))]
    return float(min(max(a), max(b)))


def trace_geodesic(S, x, y, policy=None, grid=(48, 48), check_every=1, verify=True):
    """Trace the set of points of W whose lines pass through x and y.

    The incidence curve G = 0 is traced on the first sphere; every sample is
    lifted to its hyperplane, re-located in W and certified space-like.
    """
    x = np.asarray(x, dtype=float) / x[2]
    y = np.asarray(y, dtype=float) / y[2]
    for pt in (x, y):
        if sphere_membership(S, pt) != 2:
            raise NotOnSurface("geodesic endpoints must lie on the second sphere")
    if np.max(np.abs(x - y)) < 1e-12:
        raise ValueError("x and y must be distinct")
    level, level_grad, level_grid = incidence_function(S, x, y)
    system = sphere_system(S, level, level_grad)
    seeds = sphere_seeds(S, 1, level, level_grad, level_grid, *grid)
    policy = policy or StepPolicy()
    comps = trace_level_set(system, seeds, policy)
    notes = []
    samples, closed, gaps, diams = [], [], [], []
    for comp in comps:
        closed.append(bool(comp.closed))
        gaps.append(float(comp.closure_gap) if comp.closure_gap is not None else math.inf)
        diams.append(float(comp.diameter))
        rows = []
        if verify:
            for k in range(0, len(comp.points), check_every):
                rows.append(_certify_sample(S, comp.points[k], comp.tangents[k], x, y))
        samples.append(rows)
        if not comp.closed:
            notes.append(f"component ended with {comp.termination}")
    return GeodesicTrace(x, y, comps, samples, closed, gaps, diams, empty=not comps, notes=notes)


def _certify_sample(S, yv, tangent, x, y):
    P = np.array([yv[0], yv[1], 1.0, yv[2], yv[3]])
    kap = lift_kappa(S, P, x, y)
    s = s_of_kappa(S, kap)
    flagged = not (S_EPS < s < 1 - S_EPS)
    h = _hyperplane(S, P, kap) if math.isfinite(kap) else S.B_real @ P / np.linalg.norm(S.B_real @ P)
    inc = max(abs(h @ x) / np.linalg.norm(x), abs(h @ y) / np.linalg.norm(y))
    try:
        w = w_locate(S, h)
        node_err = float(np.max(np.abs(w.p - P)))
    except NotInW:
        w = None
        node_err = math.inf
    g_t = -math.inf
    res_err = math.inf
    if w is not None and not flagged and np.all(np.isfinite(tangent)):
        dP = np.array([tangent[0], tangent[1], 0.0, tangent[2], tangent[3]])
        dh = _tangent_dh(S, w.p, dP, x, y, w.kappa)
        dh = dh - (dh @ w.h) * w.h
        nq = parametrize_minitwistor(S, w)
        q = residual_divisor(S, w, dh, nq)
        g_t = disc(q) / float(q @ q)
        res_err = _residual_points_error(S, w, dh, x, y, nq)
    return GeodesicSample(P, s, h, g_t, inc, node_err, res_err, flagged)


def geodesic_rows(trace):
    """CSV rows: component, index, p (5), s, h (5), g(tangent)."""
    rows = []
    for ci, comp in enumerate(trace.samples):
        for k, smp in enumerate(comp):
            rows.append([ci, k, *[float(v) for v in smp.p], float(smp.s), *[float(v) for v in smp.h],
                         float(smp.g_tangent)])
    return rows


# ---------------------------------------------------------------------------
# sweeps and the smoothness check at the irregular fibres


def random_sphere_point(S, which, rng, margin=1e-3):
    ch = sphere_chart(S, which)
    lo, hi = ch.theta_bounds
    th = rng.uniform(lo + margin, hi - margin)
    ph = rng.uniform(0, 2 * math.pi)
    return sphere_point_real(ch, th, ph)


def random_wpoint(S, rng, margin=1e-3):
    p = random_sphere_point(S, 1, rng, margin)
    return w_chart(S, p, rng.uniform(0.02, 0.98))


def _sweep_pair(args):
    params, seq, grid = args
    from .segre import build_surface

    S = build_surface(*params)
    rng = np.random.default_rng(seq)
    x = random_sphere_point(S, 2, rng)
    y = random_sphere_point(S, 2, rng)
    tr = trace_geodesic(S, x, y, grid=grid)
    return tr.summary()


def zoll_sweep(S, n=25, seed=7, workers=1, grid=(48, 48), closure_rel=1e-6):
    """Geodesics for n random pairs on the second sphere.

    Each pair gets its own child of SeedSequence(seed), so results do not
    depend on the worker count; rows come back in pair order.
    """
    children = np.random.SeedSequence(seed).spawn(n)
    params = tuple(float(v) for v in (S.params.alpha, S.params.beta, S.params.gamma))
    if S.permutation != (0, 1, 2, 3, 4):
        params = (S.alpha, S.beta, S.gamma)
    jobs = [(params, c, grid) for c in children]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_pair, jobs))
    else:
        rows = [_sweep_pair(j) for j in jobs]
    for i, r in enumerate(rows):
        r["pair"] = i
    nonempty = [r for r in rows if not r["empty"]]
    closed_ok = [r for r in nonempty if all(r["closed"]) and
                 all(g is not None and g <= closure_rel for g in r["relativeGaps"])]
    summary = {
        "pairs": n, "seed": seed,
        "nonEmptyRate": len(nonempty) / n if n else None,
        "closurePassRate": len(closed_ok) / len(nonempty) if nonempty else None,
        "maxRelativeGap": max((g for r in nonempty for g in r["relativeGaps"] if g is not None), default=None),
        "minGTangent": min((r["minGTangent"] for r in nonempty if r["minGTangent"] is not None), default=None),
        "maxIncidence": max((r["maxIncidence"] for r in nonempty), default=None),
        "maxNodeError": max((r["maxNodeError"] for r in nonempty), default=None),
        "componentCounts": [r["components"] for r in rows],
    }
    return rows, summary


def hole_path_point(S, which, tau):
    """Point (tau, 0, 1, cos theta, sin theta) of the first sphere near pole
    p_which, with r(theta) = |tau|; smooth in tau through the pole."""
    ch = sphere_chart(S, 1)
    lo, hi = ch.theta_bounds
    if tau == 0:
        return _pole_vectors(S)[which - 1]
    mid = 0.5 * (lo + hi)
    if which == 1:
        th = brentq(lambda t: ch.r2(t) - tau * tau, lo, mid, xtol=1e-15, rtol=1e-15)
    else:
        th = brentq(lambda t: ch.r2(t) - tau * tau, mid, hi, xtol=1e-15, rtol=1e-15)
    return np.array([tau, 0.0, 1.0, math.cos(th), math.sin(th)])


def _normalized_form_on_path(S, which, tau, s, reference):
    p = hole_path_point(S, which, tau)
    w = w_chart(S, p, s)
    basis = np.array([r - (r @ w.p) / (w.p @ w.p) * w.p for r in reference])
    form = conformal_form(S, w, basis=basis)
    return form.normalized


def hole_smoothness_report(S, which=1, s=0.5, half_width=0.2, n=41, steps=(0.08, 0.04, 0.02)):
    """Normalized conformal-form entries along a path crossing the irregular
    fibre over pole p_which, with a fixed reference basis projected to each
    tangent space."""
    w0 = w_chart(S, _pole_vectors(S)[which - 1], s)
    reference = tangent_basis_at(S, w0)
    iu = np.triu_indices(3)
    taus = np.linspace(-half_width, half_width, n)
    entries = np.array([_normalized_form_on_path(S, which, t, s, reference)[iu] for t in taus])
    diffs = np.linalg.norm(np.diff(entries, axis=0), axis=1)
    mid = int(np.argmin(np.abs(taus)))
    crossing = [k for k in (mid - 1, mid) if 0 <= k < len(diffs)]
    interior = [d for k, d in enumerate(diffs) if k not in crossing]
    median = float(np.median(interior))
    jump_ratio = float(max(diffs[k] for k in crossing) / median)
    f0 = _normalized_form_on_path(S, which, 0.0, s, reference)[iu]
    d2 = []
    for hstep in steps:
        fp = _normalized_form_on_path(S, which, hstep, s, reference)[iu]
        fm = _normalized_form_on_path(S, which, -hstep, s, reference)[iu]
        d2.append((fp - 2 * f0 + fm) / hstep ** 2)
    e1 = float(np.linalg.norm(d2[0] - d2[1]))
    e2 = float(np.linalg.norm(d2[1] - d2[2]))
    ratio = steps[0] / steps[1]
    order = math.log(e1 / e2) / math.log(ratio) if e1 > 0 and e2 > 0 else math.inf
    return {
        "which": which, "s": s, "taus": taus.tolist(), "entries": entries.tolist(),
        "firstDifferences": diffs.tolist(), "interiorMedian": median, "jumpRatio": jump_ratio,
        "steps": list(steps), "secondDifferences": [v.tolist() for v in d2],
        "richardsonOrder": order,
    }


def rotate_trace_points(points, angle):
    """Rotate slice points (u, v, x3, x4) by the circle action."""
    out = []
    for yv in points:
        w = rotate_real([yv[0], yv[1], 1.0, yv[2], yv[3]], angle)
        out.append(slice_of(w))
    return np.array(out)

