"""Real tangent-hyperplane pencils at points of the real locus and the
classification of their real sections.

At a real point P (real-form, x2 = 1) every hyperplane containing the tangent
plane is, up to scale,

    h_kappa = 2 (A - kappa B) P,     kappa in R u {infinity},

where A, B are the real-form matrices of the two quadrics. The special members
sit at kappa = infinity (H0, tangent to the base conic), alpha (H2), beta (H3)
and gamma (H4); the cuspidal member H1 is the second root of the Hessian
quadratic, which for gamma > alpha > beta lies below beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousTopology,
    AtCStarFixedPoint,
    JetFailure,
    NotOnSurface,
    TableMismatch,
    UnsupportedSection,
)
from .scalar_geometry import (
    ProjHyperplane,
    ProjPoint,
    hyperplane_from_real_form,
    hyperplane_real_form,
)
from .segre import (
    conic_angle,
    is_on_branch,
    normalize_real,
    project_pi,
    slice_of,
    sphere_constraint_jacobian,
    sphere_membership,
    sphere_tangent_basis,
)
from .tracer import (
    MarkedPoint,
    StepPolicy,
    classify_topology,
    hyperplane_level,
    local_oval_seeds,
    trace_on_spheres,
)

POLE_TOL = 1e-12

# expected real-section types along the pencil, walking from H0 through J1
EXPECTED_TABLE = {
    "H0": "DoubleConicCircle",
    "J1": "Figure8_S1",
    "H1": "CuspLoop_S1",
    "J2": "PointPlusCircle_S1",
    "H3": "TwoPoints_S1",
    "J3": "NodeOnly",
    "H2": "OnePointPair_S2",
    "J4": "PointPlusCircle_S2",
    "H4": "OnePointPair_S2",
    "J5": "NodeOnly",
}
MERGED_H1 = "TacnodePoint"

SECTION_CLASSES = (
    "DoubleConicCircle", "Figure8_S1", "CuspLoop_S1", "PointPlusCircle_S1", "TwoPoints_S1",
    "NodeOnly", "PointPlusCircle_S2", "OnePointPair_S2", "TacnodePoint",
    # outside the pencil table (general hyperplanes, nodes on the second sphere)
    "Figure8_S2", "CuspLoop_S2", "TwoPoints_S2", "Smooth", "Empty", "Other",
)
SINGULARITY_TAGS = ("node-real-branches", "node-conjugate-branches", "cusp", "tacnode", "non-reduced")


def _as_real(S, p):
    if isinstance(p, ProjPoint):
        return normalize_real(S, p)
    return normalize_real(S, np.asarray(p, dtype=float))


def _as_real_hyperplane(h):
    if isinstance(h, ProjHyperplane):
        r = hyperplane_real_form(h)
    else:
        r = np.asarray(h, dtype=float)
    return r / np.linalg.norm(r)


def is_pole(S, w):
    w = np.asarray(w, dtype=float)
    return math.hypot(w[0], w[1]) <= POLE_TOL * max(1.0, np.max(np.abs(w)))


@dataclass(frozen=True)
class PencilFrame:
    """Orthonormal basis (hA, hB) of the real tangent pencil at P.

    h(psi) = cos(psi) hA + sin(psi) hB, psi in [0, pi).
    """

    P: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    hA: np.ndarray
    hB: np.ndarray
    gradA: np.ndarray
    gradB: np.ndarray

    def h(self, psi):
        return math.cos(psi) * self.hA + math.sin(psi) * self.hB

    def angle_of(self, r):
        r = np.asarray(r, dtype=float)
        return math.atan2(float(r @ self.hB), float(r @ self.hA)) % math.pi

    def angle_of_kappa(self, kappa):
        if math.isinf(kappa):
            return self.angle_of(self.gradB)
        return self.angle_of(self.gradA - kappa * self.gradB)

    def kappa_of_angle(self, psi):
        """kappa with h(psi) proportional to gradA - kappa gradB (inf for gradB)."""
        h = self.h(psi)
        m = np.column_stack([self.gradA, -self.gradB])
        coef, *_ = np.linalg.lstsq(m, h, rcond=None)
        if abs(coef[0]) <= 1e-14 * np.linalg.norm(coef):
            return math.inf
        return float(coef[1] / coef[0])

    def contains(self, r, tol=1e-10):
        r = np.asarray(r, dtype=float)
        resid = r - (r @ self.hA) * self.hA - (r @ self.hB) * self.hB
        return float(np.linalg.norm(resid)) <= tol * np.linalg.norm(r)


def tangent_pencil(S, p):
    """Frame of the real hyperplanes containing the tangent plane at p.

    hA, hB span the null space of the three conditions h(P) = h(t1) = h(t2) = 0.
    The basis is fixed by projecting the coordinate covectors e0..e4 in order:
    hA is the normalized projection with the largest norm, hB the next
    largest after orthogonalization.
    """
    w = _as_real(S, p)
    P, t1, t2 = sphere_tangent_basis(S, w)
    m = np.vstack([P, t1, t2])
    _, _, vh = np.linalg.svd(m)
    null = vh[3:]
    proj = null.T @ null
    norms = np.linalg.norm(proj, axis=0)
    order = np.argsort(-norms, kind="stable")
    hA = proj[:, order[0]] / norms[order[0]]
    best = None
    for k in order[1:]:
        c = proj[:, k] - (proj[:, k] @ hA) * hA
        nc = np.linalg.norm(c)
        if best is None or nc > best[0] + 1e-12:
            best = (nc, c)
    hB = best[1] / best[0]
    return PencilFrame(P, t1, t2, hA, hB, 2 * S.A_real @ P, 2 * S.B_real @ P)


# ---------------------------------------------------------------------------
# special members


@dataclass(frozen=True)
class SpecialMember:
    name: str
    angle: float
    real_form: np.ndarray
    kappa: float

    @property
    def hyperplane(self):
        return hyperplane_from_real_form(self.real_form)


@dataclass(frozen=True)
class HessianForm:
    """D(psi) = [cos sin] Q [cos sin]^T; D > 0 where both node branches are real."""

    Q: np.ndarray
    roots: tuple
    jet_residual: float
    chart_axes: tuple

    def value(self, psi):
        c = np.array([math.cos(psi), math.sin(psi)])
        return float(c @ self.Q @ c)


def _graph_jet(S, P, t1, t2):
    """Second-order jet of the real locus near P as a graph over two slice axes.

    Returns (axes (i, j), dependent axes (k, l), D Phi (2x2), [F'', G''], residual).
    """
    y0 = slice_of(P)
    tb = np.column_stack([slice_of_direction(t1), slice_of_direction(t2)])
    best = None
    for i in range(4):
        for j in range(i + 1, 4):
            d = abs(np.linalg.det(tb[[i, j], :]))
            if best is None or d > best[0] + 1e-14:
                best = (d, i, j)
    _, i, j = best
    k, l = [m for m in range(4) if m not in (i, j)]
    jac = sphere_constraint_jacobian(S, y0)
    jq = jac[:, [i, j]]
    jy = jac[:, [k, l]]
    try:
        dphi = -np.linalg.solve(jy, jq)
    except np.linalg.LinAlgError as exc:
        raise JetFailure(f"implicit function solve failed at {P}") from exc
    hess = [2 * np.diag([1.0, 1.0, -S.beta, -S.gamma]), 2 * np.diag([0.0, 0.0, -1.0, -1.0])]
    evecs = []
    for a in range(2):
        e = np.zeros(4)
        e[[i, j][a]] = 1.0
        e[k], e[l] = dphi[0, a], dphi[1, a]
        evecs.append(e)
    second = np.empty((2, 2, 2))  # [dependent coord, a, b]
    resid = 0.0
    for a in range(2):
        for b in range(2):
            rhs = np.array([evecs[a] @ hm @ evecs[b] for hm in hess])
            sol = -np.linalg.solve(jy, rhs)
            second[:, a, b] = sol
            resid = max(resid, float(np.max(np.abs(rhs + jy @ sol))))
    first = float(np.max(np.abs(jq + jy @ dphi)))
    scale = max(1.0, float(np.max(np.abs(jac))))
    residual = max(resid, first) / scale
    if residual > 1e-12:
        raise JetFailure(f"jet residual {residual:.3g} exceeds 1e-12")
    return (i, j), (k, l), dphi, second, residual


def slice_of_direction(t):
    t = np.asarray(t)
    return np.array([t[0], t[1], t[3], t[4]])


def hessian_form(S, p, frame=None):
    """Hessian discriminant of the pencil at p, from the 2-jet of the surface
    written as a graph (z, w) = (F(x, y), G(x, y)) over the two slice axes
    best aligned with the tangent plane.

    The pencil member lambda (z - lin F) + mu (w - lin G) cuts the graph in
    1/2 q^T (lambda F'' + mu G'') q + O(3); D = -det(lambda F'' + mu G'') is
    positive exactly when both branches of the node are real.
    """
    w = _as_real(S, p)
    if is_pole(S, w):
        raise AtCStarFixedPoint("the tangent plane at a pole is spanned by two lines")
    frame = frame or tangent_pencil(S, w)
    (i, j), (k, l), dphi, second, residual = _graph_jet(S, frame.P, frame.t1, frame.t2)
    y0 = slice_of(frame.P)
    forms = []
    for row, dep in ((0, k), (1, l)):
        c = np.zeros(4)
        c[dep] = 1.0
        c[i] = -dphi[row, 0]
        c[j] = -dphi[row, 1]
        forms.append(np.array([c[0], c[1], -float(c @ y0), c[2], c[3]]))
    rmat = np.array([[forms[0] @ frame.hA, forms[1] @ frame.hA],
                     [forms[0] @ frame.hB, forms[1] @ frame.hB]])
    rinv = np.linalg.inv(rmat)

    def disc(cs):
        lam, mu = rinv @ cs
        m = lam * second[0] + mu * second[1]
        return -float(np.linalg.det(m))

    d0 = disc(np.array([1.0, 0.0]))
    d1 = disc(np.array([0.0, 1.0]))
    dd = disc(np.array([1.0, 1.0]))
    q = np.array([[d0, 0.5 * (dd - d0 - d1)], [0.5 * (dd - d0 - d1), d1]])
    roots = binary_quadratic_roots(q)
    return HessianForm(q, roots, residual, ((i, j), (k, l)))


def binary_quadratic_roots(q):
    """Angles psi in [0, pi) where [cos sin] q [cos sin]^T vanishes (indefinite q)."""
    ev, vec = np.linalg.eigh(q)
    if not (ev[0] < 0 < ev[1]):
        return ()
    a, c = math.sqrt(-ev[0]), math.sqrt(ev[1])
    out = []
    for sgn in (1.0, -1.0):
        d = c * vec[:, 0] + sgn * a * vec[:, 1]
        out.append(math.atan2(d[1], d[0]) % math.pi)
    return tuple(sorted(out))


def _angle_gap(a, b):
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


@dataclass(frozen=True)
class SpecialHyperplanes:
    members: dict
    merged: bool
    hessian: HessianForm

    def __getitem__(self, name):
        return self.members[name]


def special_hyperplanes(S, p, frame=None):
    """H0..H4 at a real point p of the first sphere (poles excluded).

    H0 is the pull-back of the tangent line of the base conic at f(p); H2, H3,
    H4 are pull-backs of tangent planes of Q_j at pi_j(p); H1 is the Hessian
    root different from H0.
    """
    w = _as_real(S, p)
    if is_pole(S, w):
        raise AtCStarFixedPoint("special hyperplanes are undefined at the poles p1, p2")
    frame = frame or tangent_pencil(S, w)
    P = frame.P
    members = {}
    h0 = np.array([0.0, 0.0, P[2], -P[3], -P[4]])
    members["H0"] = SpecialMember("H0", frame.angle_of(h0), h0 / np.linalg.norm(h0), math.inf)
    pc = ProjPoint((P[0] + 1j * P[1], P[0] - 1j * P[1], P[2], P[3], P[4]))
    for j, kap in ((2, S.alpha), (3, S.beta), (4, S.gamma)):
        q = project_pi(j, pc)
        grad = S.quadrics[j].gradient(q.array())
        coeffs = list(grad)
        coeffs.insert(j, 0.0)
        r = hyperplane_real_form(ProjHyperplane(coeffs))
        r = r / np.linalg.norm(r)
        if r @ (frame.gradA - kap * frame.gradB) < 0:
            r = -r
        members[f"H{j}"] = SpecialMember(f"H{j}", frame.angle_of(r), r, kap)
    hess = hessian_form(S, w, frame)
    if len(hess.roots) != 2:
        raise JetFailure("Hessian quadratic does not have two real roots")
    psi0 = members["H0"].angle
    r0, r1 = hess.roots
    psi1 = r1 if _angle_gap(r0, psi0) < _angle_gap(r1, psi0) else r0
    h1 = frame.h(psi1)
    members["H1"] = SpecialMember("H1", psi1, h1, frame.kappa_of_angle(psi1))
    merged = bool(is_on_branch(S, 3, project_pi(3, pc), tol=1e-9))
    return SpecialHyperplanes(members, merged, hess)


# ---------------------------------------------------------------------------
# singular points of real sections


@dataclass(frozen=True)
class SingularPoint:
    point: np.ndarray  # real-form, x2 = 1 (complex entries when not real)
    kappa: float
    real: bool
    sphere: int | None
    kind: str = ""


def _diag_minus(S, kappa):
    return np.array([1.0, 1.0, S.alpha - kappa, kappa - S.beta, kappa - S.gamma])


def tangency_points(S, r, rel_tol=1e-9, point_tol=1e-9):
    """All points P of S (real-form, possibly complex) where the hyperplane r
    is tangent, with the pencil coordinate kappa such that r ~ 2(A - kappa B)P.

    Writing P = (r0, r1, r2/(alpha-k), r3/(k-beta), r4/(k-gamma)) (up to scale),
    tangency means that
        N(k) = (r0^2 + r1^2)(alpha-k)(k-beta)(k-gamma) + r2^2 (k-beta)(k-gamma)
               + r3^2 (alpha-k)(k-gamma) + r4^2 (alpha-k)(k-beta)
    has a double root; kappa equal to alpha, beta or gamma needs the matching
    coefficient of r to vanish and is handled separately.
    """
    r = np.asarray(r, dtype=float)
    r = r / np.linalg.norm(r)
    al, be, ga = S.alpha, S.beta, S.gamma
    P_ = np.polynomial.Polynomial
    k = P_([0.0, 1.0])
    n = ((r[0] ** 2 + r[1] ** 2) * (al - k) * (k - be) * (k - ga) + r[2] ** 2 * (k - be) * (k - ga)
         + r[3] ** 2 * (al - k) * (k - ga) + r[4] ** 2 * (al - k) * (k - be))
    out = []
    special = {2: al, 3: be, 4: ga}
    spread = max(abs(al), abs(be), abs(ga), 1.0)
    dn = n.deriv()
    cands = list(dn.roots()) if dn.degree() >= 1 else []
    if len(cands) == 2 and abs(cands[0] - cands[1]) <= 1e-3 * spread:
        # a near-triple root of N (cusp): the root of N'' is well conditioned
        # it goes first so that it wins the de-duplication below
        cands = list(dn.deriv().roots()) + cands if dn.degree() == 2 else cands
    coef_scale = float(np.max(np.abs(n.coef))) if n.coef.size else 1.0
    for kap in cands:
        kap = complex(kap)
        if any(abs(kap - v) <= 1e-7 * spread for v in special.values()):
            continue
        val = abs(n(kap))
        if val > rel_tol * coef_scale * max(1.0, abs(kap)) ** 3:
            continue
        if abs(kap.imag) <= 1e-9 * spread:
            kap = kap.real
        elif abs(kap.imag) <= 1e-4 * spread:
            # a triple root of N (cusp) splits N' into a close complex pair
            kr = kap.real
            if (abs(n(kr)) <= rel_tol * coef_scale * max(1.0, abs(kr)) ** 3
                    and abs(dn(kr)) <= 1e-6 * coef_scale * max(1.0, abs(kr)) ** 2):
                kap = kr
        d = _diag_minus(S, kap)
        pt = r / d
        if _tangency_residual(S, r, pt) > point_tol:
            continue
        out.append(_finish_point(S, pt, kap))
    for j, kap in special.items():
        if abs(r[j]) > 1e-10:
            continue
        d = _diag_minus(S, kap)
        pt = np.zeros(5, dtype=complex)
        for m in range(5):
            if m != j:
                pt[m] = r[m] / d[m]
        # r . P = 0 is required independently of the free coordinate P_j
        if abs(np.dot(r, pt)) > 1e-8 * max(1.0, np.linalg.norm(pt)):
            continue
        rest = S.FB(pt)  # = P2^2 - P3^2 - P4^2 without the j-th term
        sign = S.B_real[j, j]
        sq = -rest / sign
        root = complex(sq) ** 0.5
        if abs(root) <= 1e-7 * max(1.0, np.linalg.norm(pt)):
            p1 = pt.copy()
            p1[j] = 0.0
            out.append(_finish_point(S, p1, kap, merged=True))
            continue
        for sgn in (1.0, -1.0):
            p1 = pt.copy()
            p1[j] = sgn * root
            out.append(_finish_point(S, p1, kap))
    return _dedupe_points(out)


def _tangency_residual(S, r, pt):
    """max(|r . P|, |F_B(P)|) relative to |P|^2 (|r| = 1)."""
    pt = np.asarray(pt, dtype=complex)
    nn = float(np.vdot(pt, pt).real)
    return max(abs(np.dot(r, pt)) / math.sqrt(nn), abs(S.FB(pt)) / nn)


def _finish_point(S, pt, kap, merged=False):
    pt = np.asarray(pt, dtype=complex)
    # fix the projective scale with x2 = 1 when possible
    if abs(pt[2]) > 1e-14 * np.max(np.abs(pt)):
        pt = pt / pt[2]
    real = bool(np.max(np.abs(pt.imag)) <= 1e-9 * max(1.0, np.max(np.abs(pt))))
    if real:
        pt = pt.real
        pt = _polish(S, pt)
    sphere = None
    if real and S.has_spheres:
        sphere = 1 if pt[4] > 0 else 2
    kind = "merged" if merged else ""
    return SingularPoint(pt, kap if not isinstance(kap, complex) else kap, real, sphere, kind)


def _polish(S, P, iters=3):
    """Newton steps pulling P back onto the two constraints in the x2 = 1 slice."""
    y = slice_of(P)
    for _ in range(iters):
        c = np.array([S.FA(P), S.FB(P)])
        j = sphere_constraint_jacobian(S, y)
        dy = j.T @ np.linalg.solve(j @ j.T, c)
        if np.max(np.abs(dy)) < 1e-16:
            break
        y = y - dy
        P = np.array([y[0], y[1], 1.0, y[2], y[3]])
    return P


def _dedupe_points(points):
    out = []
    for sp in points:
        if any(np.max(np.abs(np.asarray(sp.point) - np.asarray(o.point))) < 1e-6 for o in out):
            continue
        out.append(sp)
    return out


def local_type(S, sp, rel_tol=1e-6):
    """Type of a real singular point from the Hessian of the section on the sphere.

    For h = 2(A - kappa B)P the restricted Hessian is -2 (A - kappa B) on the
    tangent plane. Indefinite: node with real branches; definite: node with
    conjugate branches; degenerate: cusp, or tacnode when two singular points
    have merged.
    """
    P, t1, t2 = sphere_tangent_basis(S, sp.point)
    if math.isinf(sp.kappa):
        m = -np.array([[t @ S.B_real @ s for s in (t1, t2)] for t in (t1, t2)])
    else:
        k = S.A_real - sp.kappa * S.B_real
        m = np.array([[t @ k @ s for s in (t1, t2)] for t in (t1, t2)])
    ev = np.linalg.eigvalsh(m)
    big = max(abs(ev[0]), abs(ev[1]), 1e-300)
    if min(abs(ev[0]), abs(ev[1])) <= rel_tol * big:
        return "tacnode" if sp.kind == "merged" else "cusp", m
    if ev[0] * ev[1] < 0:
        return "node-real-branches", m
    return "node-conjugate-branches", m


# ---------------------------------------------------------------------------
# section classification


@dataclass
class SectionResult:
    tag: str
    singular_points: list
    node_tag: str | None
    components: dict
    topology: dict
    hyperplane: np.ndarray
    notes: list = field(default_factory=list)

    def all_components(self):
        return [c for which in sorted(self.components) for c in self.components[which]]


def _base_line_section(S, r, rel_tol=1e-9):
    """Hyperplanes through both nodes: pull-backs of lines of the base plane."""
    line = np.array(r[2:], dtype=float)
    tangent = line[0] ** 2 - line[1] ** 2 - line[2] ** 2
    scale = float(line @ line)
    if abs(tangent) <= rel_tol * scale:
        lam = np.array([line[0], -line[1], -line[2]])
        lam = lam / lam[0]
        theta = math.atan2(lam[2], lam[1])
        r2 = S.beta * lam[1] ** 2 + S.gamma * lam[2] ** 2 - S.alpha
        # gradient of h lies in the span of the quadric gradients along the fibre
        ok = True
        for phi in np.linspace(0, 2 * np.pi, 7, endpoint=False):
            rad = complex(r2) ** 0.5
            X = np.array([rad * math.cos(phi), rad * math.sin(phi), 1.0, lam[1], lam[2]], dtype=complex)
            span = np.vstack([S.A_real @ X, S.B_real @ X, r])
            sv = np.linalg.svd(span, compute_uv=False)
            ok = ok and sv[-1] <= 1e-9 * sv[0]
        if not ok:
            raise UnsupportedSection("hyperplane through the nodes with a reduced fibre section")
        comps = {}
        if r2 > 0:
            rad = math.sqrt(r2)
            phis = np.linspace(0, 2 * np.pi, 257)
            pts = np.array([[rad * math.cos(f), rad * math.sin(f), lam[1], lam[2]] for f in phis])
            from .tracer import TraceComponent

            circle = TraceComponent(points=pts, tangents=np.full_like(pts, np.nan), closed=True,
                                    closure_gap=0.0, arc_length=2 * math.pi * rad, diameter=2 * rad,
                                    termination=("fibre-circle",))
            comps[1 if lam[2] > 0 else 2] = [circle]
        tag = "DoubleConicCircle" if r2 > 0 else "Other"
        return SectionResult(tag, [], "non-reduced", comps, {}, r,
                             notes=[f"double fibre over theta={theta % (2 * math.pi):.12g}"])
    # a line through a discriminant point lambda_i: l_i + lbar_i + D_lambda
    for i, lam_i in enumerate(S.lambdas):
        li = np.array([complex(x) for x in lam_i]).real
        if abs(line @ li) <= 1e-9 * np.linalg.norm(line) * np.linalg.norm(li):
            return _irregular_section(S, r, i)
    raise UnsupportedSection("hyperplane through the nodes that is not of the irregular family")


def other_conic_point(S, line, known):
    """Second intersection of a line (coefficients) with the base conic."""
    line = np.asarray(line, dtype=float)
    known = np.asarray(known, dtype=float)
    _, _, vh = np.linalg.svd(line.reshape(1, 3))
    d = vh[1] if abs(vh[1] @ known) < abs(vh[2] @ known) else vh[2]
    d = d - (d @ known) / (known @ known) * known
    b = np.diag([1.0, -1.0, -1.0])
    # (known + t d) on the conic: 2 t B(known, d) + t^2 B(d, d) = 0
    t = -2 * (known @ b @ d) / (d @ b @ d)
    pt = known + t * d
    return pt / pt[0]


def _irregular_section(S, r, i):
    pole = np.array([complex(x) for x in S.poles[i]]).real
    pole = pole / pole[2]
    lam_i = pole[2:]
    lam = other_conic_point(S, r[2:], lam_i)
    theta = math.atan2(lam[2], lam[1]) % (2 * math.pi)
    r2 = S.beta * lam[1] ** 2 + S.gamma * lam[2] ** 2 - S.alpha
    home = 1 if pole[4] > 0 else 2
    sp = SingularPoint(pole, math.nan, True, home, "irregular")
    points = [sp]
    comps = {}
    scale = max(1.0, abs(S.gamma))
    other = None
    for j, lam_j in enumerate(S.lambdas):
        lj = np.array([complex(x) for x in lam_j]).real
        lj = lj / lj[0]
        if j != i and np.max(np.abs(lj - lam)) < 1e-8:
            other = j
    if other is not None:
        q = np.array([complex(x) for x in S.poles[other]]).real
        q = q / q[2]
        points.append(SingularPoint(q, math.nan, True, 1 if q[4] > 0 else 2, "irregular"))
        tag = f"TwoPoints_S{home}" if points[1].sphere == home else f"OnePointPair_S{points[1].sphere}"
    elif r2 > 1e-12 * scale:
        rad = math.sqrt(r2)
        phis = np.linspace(0, 2 * np.pi, 257)
        pts = np.array([[rad * math.cos(f), rad * math.sin(f), lam[1], lam[2]] for f in phis])
        from .tracer import TraceComponent

        circ = TraceComponent(points=pts, tangents=np.full_like(pts, np.nan), closed=True, closure_gap=0.0,
                              arc_length=2 * math.pi * rad, diameter=2 * rad, termination=("fibre-circle",))
        which = 1 if lam[2] > 0 else 2
        comps[which] = [circ]
        tag = f"PointPlusCircle_S{which}"
    else:
        tag = "NodeOnly"
    return SectionResult(tag, points, "node-conjugate-branches", comps, {}, r,
                         notes=[f"irregular: lines through pole {i + 1} plus the fibre over theta={theta:.12g}"])


def classify_section(S, h, node=None, grid=(48, 48), policy=None, ball=2e-3):
    """Singular points, traced real locus and type of the real section S n H.

    ``node`` optionally names the point whose pencil H belongs to; its local
    type is then reported as ``node_tag``.
    """
    S.require_spheres()
    r = _as_real_hyperplane(h)
    if math.hypot(r[0], r[1]) <= 1e-12:
        return _base_line_section(S, r)
    sing = tangency_points(S, r)
    real_sing = [sp for sp in sing if sp.real]
    typed = []
    for sp in real_sing:
        kind, _ = local_type(S, sp)
        typed.append((sp, kind))
    marked, seeds = [], []
    level, level_grad, level_grid = hyperplane_level(r)
    for sp, kind in typed:
        y = slice_of(sp.point)
        dirs = ()
        if kind in ("node-real-branches", "cusp"):
            dirs = _branch_dirs(S, sp, kind)
            for d in dirs:
                seeds.append((y + 2.5 * ball * d, d))
        marked.append(MarkedPoint(y, kind, ball, dirs))
        seeds.extend(local_oval_seeds(S, level, level_grad, y))
    comps, _ = trace_on_spheres(S, level, level_grad, level_grid, marked, policy or StepPolicy(),
                                grid, seeds)
    topo = {}
    notes = []
    for which in (1, 2):
        mk = [m for m in marked if (m.location[3] > 0) == (which == 1)]
        try:
            topo[which] = classify_topology(comps[which], mk)
        except AmbiguousTopology as exc:
            topo[which] = None
            notes.append(f"S{which}: {exc} candidates={exc.candidates}")
    tag = _assign_tag(typed, comps, topo)
    node_tag = None
    if node is not None:
        w = _as_real(S, node)
        for sp, kind in typed:
            if np.max(np.abs(sp.point - w)) < 1e-6:
                node_tag = kind
        if node_tag is None:
            notes.append("the given node is not a singular point of the section")
    return SectionResult(tag, [sp for sp, _ in typed], node_tag, comps, topo, r, notes)


def _branch_dirs(S, sp, kind):
    P, t1, t2 = sphere_tangent_basis(S, sp.point)
    k = S.A_real - sp.kappa * S.B_real
    m = np.array([[t @ k @ s for s in (t1, t2)] for t in (t1, t2)])
    ev, vec = np.linalg.eigh(m)
    tb = np.column_stack([slice_of_direction(t1), slice_of_direction(t2)])
    if kind == "cusp":
        kk = int(np.argmin(np.abs(ev)))
        d = tb @ vec[:, kk]
        return (d, -d)
    a, c = math.sqrt(-ev[0]), math.sqrt(ev[1])
    dirs = []
    for sgn in (1.0, -1.0):
        d = c * vec[:, 0] + sgn * a * vec[:, 1]
        d = tb @ (d / np.linalg.norm(d))
        dirs.extend([d, -d])
    return tuple(dirs)


def _assign_tag(typed, comps, topo):
    if any(t is None for t in topo.values()):
        return "Other"
    n_circles = {w: topo[w].circles for w in (1, 2)}
    if not typed:
        if sum(len(c) for c in comps.values()) == 0:
            return "Empty"
        return "Smooth"
    if len(typed) == 1:
        sp, kind = typed[0]
        k = sp.sphere
        other = 2 if k == 1 else 1
        tk = topo[k].tag
        if kind == "node-real-branches":
            return f"Figure8_S{k}" if tk == "Figure8" and n_circles[other] == 0 and n_circles[k] == 0 else "Other"
        if kind == "cusp":
            return f"CuspLoop_S{k}" if tk == "CuspLoop" and n_circles[other] == 0 and n_circles[k] == 0 else "Other"
        if kind == "tacnode":
            return "TacnodePoint" if tk == "PointOnly" and n_circles[other] == 0 else "Other"
        # isolated real node
        if n_circles[k] == 1 and n_circles[other] == 0:
            return f"PointPlusCircle_S{k}"
        if n_circles[other] == 1 and n_circles[k] == 0:
            return f"PointPlusCircle_S{other}"
        if n_circles[k] == 0 and n_circles[other] == 0:
            return "NodeOnly"
        return "Other"
    if len(typed) == 2 and all(kind == "node-conjugate-branches" for _, kind in typed):
        if sum(n_circles.values()) != 0:
            return "Other"
        s1, s2 = typed[0][0].sphere, typed[1][0].sphere
        if s1 == s2:
            return f"TwoPoints_S{s1}"
        return "OnePointPair_S2"
    return "Other"


# ---------------------------------------------------------------------------
# the full profile


@dataclass
class PencilProfile:
    frame: PencilFrame
    specials: SpecialHyperplanes
    order: list  # special member names in walking order starting at H0
    direction: int  # +1 if psi increases from H0 into J1
    intervals: list  # dicts: name, start, end, sample, expected, tag, node_tag
    members: list  # dicts for the special members
    merged: bool
    diagnostics: list

    @property
    def table_ok(self):
        return not self.diagnostics


def _walk(psi0, psi, direction):
    return (direction * (psi - psi0)) % math.pi


def pencil_profile(S, p, samples=1, strict=False, grid=(48, 48), classify_members=True):
    """Special members, intervals and section types of the pencil at p.

    The walk starts at H0 and enters J1, the arc on which the Hessian is
    positive. Each interval is sampled at ``samples`` evenly spaced interior
    angles (the midpoint when samples=1) and compared with the expected table.
    """
    w = _as_real(S, p)
    if sphere_membership(S, w) != 1:
        raise NotOnSurface("pencil profiles are defined for points of the first sphere")
    if is_pole(S, w):
        raise AtCStarFixedPoint("use the W chart at the poles p1, p2")
    frame = tangent_pencil(S, w)
    sp = special_hyperplanes(S, w, frame)
    psi0 = sp["H0"].angle
    psi1 = sp["H1"].angle
    hess = sp.hessian
    direction = 1
    mid = psi0 + 0.5 * ((psi1 - psi0) % math.pi)
    if hess.value(mid) < 0:
        direction = -1
    diagnostics = []
    names = ["H0", "H1", "H3", "H2", "H4"]
    if sp.merged:
        if _angle_gap(sp["H1"].angle, sp["H3"].angle) > 1e-8:
            diagnostics.append("merged stratum but H1 and H3 differ by "
                               f"{_angle_gap(sp['H1'].angle, sp['H3'].angle):.3g}")
        names = ["H0", "H1", "H2", "H4"]
    dist = {n: _walk(psi0, sp[n].angle, direction) for n in names}
    order = sorted(names, key=lambda n: dist[n])
    if order != names:
        diagnostics.append(f"cyclic order {order} differs from {names}")
    if sp.merged:
        interval_names = ["J1", "J3", "J4", "J5"]
    else:
        interval_names = ["J1", "J2", "J3", "J4", "J5"]
    bounds = [dist[n] for n in names] + [math.pi]
    intervals = []
    for idx, jn in enumerate(interval_names):
        lo, hi = bounds[idx], bounds[idx + 1]
        for k in range(samples):
            t = lo + (hi - lo) * (k + 1) / (samples + 1)
            psi = (psi0 + direction * t) % math.pi
            res = classify_section(S, frame.h(psi), node=w, grid=grid)
            expected = EXPECTED_TABLE[jn]
            entry = {
                "name": jn, "start": (psi0 + direction * lo) % math.pi,
                "end": (psi0 + direction * hi) % math.pi, "sample": psi,
                "expected": expected, "tag": res.tag, "node_tag": res.node_tag,
                "hessian": hess.value(psi), "result": res,
            }
            if res.tag != expected:
                diagnostics.append(f"{jn} at psi={psi:.6f}: got {res.tag}, expected {expected}")
            hsign = hess.value(psi)
            want = "node-real-branches" if hsign > 0 else "node-conjugate-branches"
            if res.node_tag != want:
                diagnostics.append(f"{jn}: node type {res.node_tag} disagrees with Hessian sign {hsign:+.3g}")
            intervals.append(entry)
    members = []
    if classify_members:
        for n in ["H0", "H1", "H3", "H2", "H4"]:
            if sp.merged and n == "H3":
                continue
            res = classify_section(S, sp[n].real_form, node=w, grid=grid)
            expected = EXPECTED_TABLE[n]
            if sp.merged and n == "H1":
                expected = MERGED_H1
            if res.tag != expected:
                diagnostics.append(f"{n}: got {res.tag}, expected {expected}")
            members.append({"name": n, "angle": sp[n].angle, "expected": expected, "tag": res.tag,
                            "node_tag": res.node_tag, "result": res})
    prof = PencilProfile(frame, sp, order, direction, intervals, members, sp.merged, diagnostics)
    if strict and diagnostics:
        raise TableMismatch("; ".join(diagnostics))
    return prof


def profile_to_json(prof):
    sp = prof.specials
    return {
        "point": [float(x) for x in prof.frame.P],
        "frame": {"hA": [float(x) for x in prof.frame.hA], "hB": [float(x) for x in prof.frame.hB]},
        "merged": prof.merged,
        "direction": prof.direction,
        "specialAngles": {n: sp[n].angle for n in ("H0", "H1", "H2", "H3", "H4")},
        "specialHyperplanes": {n: [float(x) for x in sp[n].real_form] for n in ("H0", "H1", "H2", "H3", "H4")},
        "order": prof.order,
        "hessian": {"Q": [[float(x) for x in row] for row in sp.hessian.Q],
                    "roots": list(sp.hessian.roots), "jetResidual": sp.hessian.jet_residual},
        "intervals": [{k: v for k, v in e.items() if k != "result"} for e in prof.intervals],
        "members": [{k: v for k, v in e.items() if k != "result"} for e in prof.members],
        "tableOk": prof.table_ok,
        "diagnostics": prof.diagnostics,
    }


def base_point_angle(S, w):
    """Angle of f(w) on the base conic."""
    return conic_angle(np.asarray(w)[2:])
