"""Scalars, projective points and hyperplanes, the real structure, and small
linear algebra / polynomial helpers.

Two arithmetic modes exist throughout the package:

* ``"exact"``  -- ``fractions.Fraction`` entries, error-free, real rationals only;
* ``"approx"`` -- double precision, always compared with an explicit tolerance.

Real-form coordinates ``(u, v, x2, x3, x4)`` describe a point whose complex
coordinates are ``(u + iv, u - iv, x2, x3, x4)``. In these coordinates the
real structure acts as plain complex conjugation, and the surface quadrics
become real diagonal forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
import sympy

from .errors import (
    CommonComponent,
    DegenerateInput,
    ModeMismatch,
    NotRealPoint,
)

MODES = ("exact", "approx")
PROJ_TOL = 1e-9


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")


def to_exact(value):
    """Convert an int/Fraction/decimal string to Fraction; floats are refused."""
    if isinstance(value, Scalar):
        value = value.value
    if isinstance(value, (float, complex, np.floating, np.complexfloating)):
        raise ModeMismatch("floating point value in exact mode")
    if isinstance(value, (Rational, str)):
        return Fraction(value)
    if isinstance(value, (np.integer,)):
        return Fraction(int(value))
    raise ModeMismatch(f"cannot use {type(value).__name__} in exact mode")


class Scalar:
    """A number tagged with its arithmetic mode.

    Arithmetic between two scalars of different modes raises ModeMismatch.
    Plain Python ints combine with either mode.
    """

    __slots__ = ("mode", "value")

    def __init__(self, value, mode="approx"):
        _check_mode(mode)
        self.mode = mode
        if mode == "exact":
            self.value = to_exact(value)
        else:
            if isinstance(value, Scalar):
                value = value.value
            value = complex(value)
            self.value = value.real if value.imag == 0 else value

    def _other(self, other):
        if isinstance(other, Scalar):
            if other.mode != self.mode:
                raise ModeMismatch(f"cannot combine {self.mode} with {other.mode}")
            return other.value
        if isinstance(other, bool) or not isinstance(other, (int, float, complex, Fraction)):
            return NotImplemented
        if self.mode == "exact":
            return to_exact(other)
        return other

    def _wrap(self, value):
        return Scalar(value, self.mode)

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self.value)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value / o)

    def __rtruediv__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(o / self.value)

    def __neg__(self):
        return self._wrap(-self.value)

    def __abs__(self):
        return self._wrap(abs(self.value))

    def __eq__(self, other):
        if self.mode == "approx":
            raise TypeError("approx scalars compare only through isclose(other, tol)")
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self.value == o

    def __hash__(self):
        return hash((self.mode, self.value))

    def isclose(self, other, tol):
        o = self._other(other)
        if self.mode == "exact":
            return self.value == o
        return abs(self.value - o) <= tol

    def is_zero(self, tol=None):
        if self.mode == "exact":
            return self.value == 0
        if tol is None:
            raise TypeError("approx comparison needs an explicit tolerance")
        return abs(self.value) <= tol

    def __repr__(self):
        return f"Scalar({self.value!r}, {self.mode!r})"


def _coerce_coords(coords, mode):
    if mode == "exact":
        return tuple(to_exact(c) for c in coords)
    return tuple(complex(c.value if isinstance(c, Scalar) else c) for c in coords)


class _ProjVector:
    __slots__ = ("coords", "mode")

    def __init__(self, coords, mode="approx"):
        _check_mode(mode)
        coords = _coerce_coords(coords, mode)
        if len(coords) not in (3, 4, 5):
            raise DegenerateInput("projective vectors need 3, 4 or 5 coordinates")
        if all(c == 0 for c in coords):
            raise DegenerateInput("all coordinates are zero")
        self.coords = coords
        self.mode = mode

    @property
    def dim(self):
        """Projective dimension (2, 3 or 4)."""
        return len(self.coords) - 1

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def array(self):
        return np.array([complex(c) for c in self.coords], dtype=complex)

    def canonical(self):
        """Representative with its largest-modulus coordinate equal to 1."""
        if self.mode == "exact":
            k = max(range(len(self.coords)), key=lambda i: abs(self.coords[i]))
            pivot = self.coords[k]
            return type(self)([c / pivot for c in self.coords], "exact")
        arr = self.array()
        k = int(np.argmax(np.abs(arr)))
        return type(self)(arr / arr[k], "approx")

    def equals(self, other, tol=PROJ_TOL):
        return proj_equal(self.coords, other.coords, tol=tol, exact=self.mode == other.mode == "exact")

    def __eq__(self, other):
        if not isinstance(other, _ProjVector):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self):
        name = type(self).__name__
        if self.mode == "exact":
            body = ", ".join(str(c) for c in self.coords)
        else:
            body = ", ".join(_fmt_complex(c) for c in self.coords)
        return f"{name}({body})"


def _fmt_complex(c):
    if abs(c.imag) < 1e-15:
        return f"{c.real:.6g}"
    return f"{c.real:.6g}{c.imag:+.6g}j"


class ProjPoint(_ProjVector):
    """Point of CP2, CP3 or CP4 given by homogeneous coordinates."""


class ProjHyperplane(_ProjVector):
    """Hyperplane given by the coefficients of a linear form."""

    def evaluate(self, point):
        coords = point.coords if isinstance(point, _ProjVector) else point
        if self.mode == "exact" and all(isinstance(c, Fraction) for c in coords):
            return sum((h * x for h, x in zip(self.coords, coords)), Fraction(0))
        return complex(np.dot(self.array(), np.asarray(coords, dtype=complex)))

    def is_real(self, tol=PROJ_TOL):
        return proj_equal(_sigma_tuple(self.coords), self.coords, tol=tol,
                          exact=self.mode == "exact")


def proj_equal(p, q, tol=PROJ_TOL, exact=False):
    """Equality of two coordinate tuples up to a common nonzero scale."""
    if len(p) != len(q):
        return False
    if exact:
        n = len(p)
        return all(p[i] * q[j] == p[j] * q[i] for i in range(n) for j in range(i + 1, n))
    a = np.asarray(p, dtype=complex)
    b = np.asarray(q, dtype=complex)
    k = int(np.argmax(np.abs(a)))
    if abs(b[k]) <= tol * max(1.0, np.max(np.abs(b))):
        return False
    return bool(np.max(np.abs(a / a[k] - b / b[k])) <= tol)


def _sigma_tuple(coords):
    c = list(coords)
    if len(c) < 2:
        return tuple(c)
    conj = [x.conjugate() if isinstance(x, complex) else x for x in c]
    return tuple([conj[1], conj[0]] + conj[2:])


def apply_real_structure(p):
    """sigma(X0, X1, X2, ...) = (conj X1, conj X0, conj X2, ...)."""
    return type(p)(_sigma_tuple(p.coords), p.mode)


def _real_phase(arr, tol):
    """Unit complex c with c*arr fixed by the real structure, or None."""
    s = np.array(_sigma_tuple(tuple(arr)), dtype=complex)
    k = int(np.argmax(np.abs(arr)))
    if abs(arr[k]) == 0:
        return None
    mu = s[k] / arr[k]
    if abs(abs(mu) - 1.0) > tol or np.max(np.abs(s - mu * arr)) > tol * np.max(np.abs(arr)):
        return None
    return np.exp(0.5j * np.angle(mu))


def real_form(p, tol=PROJ_TOL):
    """Real-form vector (u, v, x2, x3, x4) of a sigma-fixed point.

    Exact points (real rationals) give a tuple of Fractions; approx points give
    a float array. Raises NotRealPoint if no sigma-fixed representative exists.
    """
    if len(p) != 5:
        raise DegenerateInput("real_form needs a point of CP4")
    if p.mode == "exact":
        x = p.coords
        if x[0] != x[1]:
            raise NotRealPoint(f"{p!r} is not fixed by the real structure")
        return (x[0], Fraction(0), x[2], x[3], x[4])
    arr = p.array()
    scale = np.max(np.abs(arr))
    c = _real_phase(arr / scale, tol)
    if c is None:
        raise NotRealPoint(f"{p!r} is not fixed by the real structure")
    q = c * arr
    return np.array([q[0].real, q[0].imag, q[2].real, q[3].real, q[4].real])


def complexify(w):
    """Inverse of real_form: (u, v, x2, x3, x4) -> (u+iv, u-iv, x2, x3, x4)."""
    if all(isinstance(x, (Fraction, int)) for x in w):
        if w[1] != 0:
            raise ModeMismatch("exact points need v = 0 (no Gaussian rationals)")
        return ProjPoint((w[0], w[0], w[2], w[3], w[4]), "exact")
    w = np.asarray(w, dtype=float)
    return ProjPoint((w[0] + 1j * w[1], w[0] - 1j * w[1], w[2], w[3], w[4]))


def hyperplane_real_form(h, tol=PROJ_TOL):
    """Real coefficient vector r with h(complexify(w)) proportional to r . w.

    Raises NotRealPoint when h is not a real hyperplane.
    """
    arr = h.array()
    scale = np.max(np.abs(arr))
    c = _real_phase(arr / scale, tol)
    if c is None:
        raise NotRealPoint(f"{h!r} is not a real hyperplane")
    q = c * arr
    r = np.array([(q[0] + q[1]).real, (1j * (q[0] - q[1])).real, q[2].real, q[3].real, q[4].real])
    return r


def hyperplane_from_real_form(r, mode="approx"):
    """Complex coefficients (h0, h1, ...) = ((r0 - i r1)/2, (r0 + i r1)/2, r2, r3, r4)."""
    if mode == "exact":
        r = [to_exact(x) for x in r]
        if r[1] != 0:
            raise ModeMismatch("exact hyperplanes need r1 = 0")
        return ProjHyperplane((r[0] / 2, r[0] / 2, r[2], r[3], r[4]), "exact")
    r = np.asarray(r, dtype=float)
    return ProjHyperplane(((r[0] - 1j * r[1]) / 2, (r[0] + 1j * r[1]) / 2, r[2], r[3], r[4]))


class QuadricForm:
    """Symmetric coefficient matrix M; the quadric is x^T M x = 0 (no conjugation)."""

    __slots__ = ("matrix", "mode")

    def __init__(self, matrix, mode="approx"):
        _check_mode(mode)
        if mode == "exact":
            rows = tuple(tuple(to_exact(x) for x in row) for row in matrix)
            n = len(rows)
            if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(n)):
                raise DegenerateInput("quadric matrix is not symmetric")
            self.matrix = rows
        else:
            m = np.array(matrix)
            m = m.astype(complex) if np.iscomplexobj(m) else m.astype(float)
            if not np.allclose(m, m.T, atol=1e-14):
                raise DegenerateInput("quadric matrix is not symmetric")
            self.matrix = m
        self.mode = mode

    @property
    def size(self):
        return len(self.matrix)

    def array(self):
        return np.array([[complex(x) for x in row] for row in self.matrix], dtype=complex)

    def bilinear(self, p, q):
        p = p.coords if isinstance(p, _ProjVector) else p
        q = q.coords if isinstance(q, _ProjVector) else q
        if self.mode == "exact" and all(isinstance(x, (Fraction, int)) for x in (*p, *q)):
            n = self.size
            return sum((self.matrix[i][j] * p[i] * q[j] for i in range(n) for j in range(n)
                        if self.matrix[i][j] != 0), Fraction(0))
        m = self.array()
        return complex(np.asarray(p, dtype=complex) @ m @ np.asarray(q, dtype=complex))

    def evaluate(self, p):
        return self.bilinear(p, p)

    def gradient(self, p):
        """Half-gradient M p (the polar hyperplane of p)."""
        p = p.coords if isinstance(p, _ProjVector) else p
        if self.mode == "exact" and all(isinstance(x, (Fraction, int)) for x in p):
            return tuple(sum((row[j] * p[j] for j in range(len(p))), Fraction(0)) for row in self.matrix)
        return self.array() @ np.asarray(p, dtype=complex)

    def restrict(self, basis):
        """Gram matrix E^T M E of the form on the span of the columns of E."""
        e = np.asarray(basis, dtype=complex)
        return e.T @ self.array() @ e

    def __repr__(self):
        return f"QuadricForm(size={self.size}, mode={self.mode!r})"


# ---------------------------------------------------------------------------
# small dense linear algebra


def _is_exact_matrix(m):
    return all(isinstance(x, (Fraction, int)) and not isinstance(x, bool) for row in m for x in row)


def det5(m):
    """Determinant of a square matrix; exact for Fraction entries."""
    if _is_exact_matrix(m):
        d = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x
                           for x in row] for row in m]).det()
        return Fraction(int(d.p), int(d.q))
    return complex(np.linalg.det(np.asarray(m, dtype=complex))) if np.iscomplexobj(m) \
        else float(np.linalg.det(np.asarray(m, dtype=float)))


def kernel(m, rtol=1e-10):
    """Basis of the right null space, as rows."""
    if _is_exact_matrix(m):
        mat = sympy.Matrix([[sympy.Rational(str(x)) for x in row] for row in m])
        return [tuple(Fraction(int(x.p), int(x.q)) for x in vec) for vec in mat.nullspace()]
    a = np.atleast_2d(np.asarray(m))
    _, s, vh = np.linalg.svd(a)
    smax = s[0] if s.size else 1.0
    rank = int(np.sum(s > rtol * max(smax, 1e-300)))
    return vh[rank:].conj()


def span(vectors, rtol=1e-10):
    """Orthonormal (approx) or row-reduced (exact) basis of the span of the rows."""
    if _is_exact_matrix(vectors):
        mat = sympy.Matrix([[sympy.Rational(str(x)) for x in row] for row in vectors])
        rref, pivots = mat.rref()
        return [tuple(Fraction(int(x.p), int(x.q)) for x in rref.row(i)) for i in range(len(pivots))]
    a = np.atleast_2d(np.asarray(vectors))
    _, s, vh = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > rtol * max(s[0], 1e-300)))
    return vh[:rank]


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class ExactRoots:
    """Rational roots plus the irreducible non-linear factors left over."""

    roots: tuple  # ((Fraction, multiplicity), ...)
    residual_factors: tuple  # ((coeffs high->low, discriminant, multiplicity), ...)


def _cluster(values, tol):
    """Group nearby complex numbers; returns [(mean, count)] in input order of first member."""
    groups = []
    for z in values:
        for g in groups:
            if abs(z - g[0] / g[1]) <= tol:
                g[0] += z
                g[1] += 1
                break
        else:
            groups.append([z, 1])
    return [(g[0] / g[1], g[1]) for g in groups]


def solve_poly(coeffs, mode="approx", cluster_tol=1e-6):
    """Roots with multiplicities of a polynomial given highest degree first.

    approx: companion-matrix eigenvalues; roots closer than ``cluster_tol``
    (relative to the root size) are merged into one root of higher multiplicity.
    exact: rational roots from a factorization over Q, and the remaining
    irreducible factors with their discriminants.
    """
    if mode == "exact":
        c = [to_exact(x) for x in coeffs]
        while c and c[0] == 0:
            c.pop(0)
        if not c:
            raise DegenerateInput("zero polynomial")
        x = sympy.Symbol("x")
        poly = sympy.Poly([sympy.Rational(v.numerator, v.denominator) for v in c], x, domain="QQ")
        _, factors = poly.factor_list()
        roots, rest = [], []
        for f, mult in factors:
            if f.degree() == 1:
                a1, a0 = f.all_coeffs()
                r = -sympy.Rational(a0) / sympy.Rational(a1)
                roots.append((Fraction(int(r.p), int(r.q)), mult))
            else:
                fc = tuple(Fraction(int(v.p), int(v.q)) for v in f.all_coeffs())
                disc = sympy.discriminant(f.as_expr(), x)
                rest.append((fc, Fraction(int(disc.p), int(disc.q)), mult))
        roots.sort(key=lambda t: t[0])
        return ExactRoots(tuple(roots), tuple(rest))
    c = np.array(coeffs, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0:
        raise DegenerateInput("zero polynomial")
    nz = np.nonzero(np.abs(c) > 1e-14 * scale)[0]
    c = c[nz[0]:]
    if c.size == 1:
        return []
    raw = np.roots(c)
    if np.all(np.abs(c.imag) == 0):
        raw = np.where(np.abs(raw.imag) <= 1e-12 * np.maximum(1.0, np.abs(raw)), raw.real, raw)
    rsize = max(1.0, float(np.max(np.abs(raw))))
    out = _cluster(list(raw), cluster_tol * rsize)
    real_input = bool(np.all(c.imag == 0))
    cleaned = []
    for z, m in out:
        z = complex(z)
        if real_input and abs(z.imag) <= cluster_tol * max(1.0, abs(z)):
            cleaned.append((z.real, m))
        else:
            cleaned.append((z, m))
    cleaned.sort(key=lambda t: (round(complex(t[0]).real, 12), round(complex(t[0]).imag, 12)))
    return cleaned


def _conic_coeffs(m):
    """Coefficients in z of x^T M x with x = (X, 1, z), as polynomials in X (increasing order)."""
    p = np.polynomial.polynomial
    a2 = np.array([m[2, 2]])
    a1 = np.array([2 * m[1, 2], 2 * m[0, 2]])
    a0 = np.array([m[1, 1], 2 * m[0, 1], m[0, 0]])
    return a2, a1, a0, p


def _resultant(ma, mb):
    a2, a1, a0, p = _conic_coeffs(ma)
    b2, b1, b0, _ = _conic_coeffs(mb)
    t1 = p.polysub(p.polymul(a2, b0), p.polymul(a0, b2))
    t2 = p.polysub(p.polymul(a2, b1), p.polymul(a1, b2))
    t3 = p.polysub(p.polymul(a1, b0), p.polymul(a0, b1))
    res = p.polysub(p.polymul(t1, t1), p.polymul(t2, t3))
    out = np.zeros(5, dtype=complex)
    out[: len(res)] = res[:5]
    return out, (a2, a1, a0), (b2, b1, b0)


# fixed generic coordinate changes for the elimination; the best conditioned one is used
_GENERIC_FRAMES = [
    np.array([[1.0, 0.31, -0.27], [0.17, 1.0, 0.41], [-0.23, 0.37, 1.0]]),
    np.array([[0.83, -0.41, 0.29], [0.52, 0.77, -0.33], [0.19, 0.46, 0.91]]),
    np.array([[1.0, 0.7, 0.2], [-0.6, 1.0, 0.5], [0.3, -0.4, 1.0]]),
]


def intersect_conics(plane_basis, q1, q2, cluster_tol=1e-6):
    """Common zeros of two quadrics restricted to a projective plane.

    ``plane_basis`` is three points (or a 3 x n array of rows) spanning the plane.
    Returns ``[(ProjPoint, multiplicity), ...]`` with multiplicities summing to 4.
    """
    rows = [b.array() if isinstance(b, _ProjVector) else np.asarray(b, dtype=complex) for b in plane_basis]
    e = np.array(rows).T
    if np.linalg.matrix_rank(e, tol=1e-10 * np.max(np.abs(e))) < 3:
        raise DegenerateInput("plane basis is not independent")
    m1 = q1.restrict(e) if isinstance(q1, QuadricForm) else e.T @ np.asarray(q1) @ e
    m2 = q2.restrict(e) if isinstance(q2, QuadricForm) else e.T @ np.asarray(q2) @ e
    m1 = m1 / np.max(np.abs(m1))
    m2 = m2 / np.max(np.abs(m2))
    best = None
    for frame in _GENERIC_FRAMES:
        fa, fb = frame.T @ m1 @ frame, frame.T @ m2 @ frame
        res, ca, cb = _resultant(fa, fb)
        norm = np.max(np.abs(res))
        if norm < 1e-12:
            raise CommonComponent("restricted conics share a component")
        quality = abs(res[4]) / norm
        if best is None or quality > best[0]:
            best = (quality, frame, res, ca, cb, fa, fb)
    quality, frame, res, ca, cb, fa, fb = best
    if quality < 1e-9:
        raise CommonComponent("resultant degenerates in every elimination frame")
    xs = np.roots(res[::-1])
    groups = _cluster(list(xs), cluster_tol * max(1.0, float(np.max(np.abs(xs)))))
    p = np.polynomial.polynomial
    out = []
    for x, mult in groups:
        a = [complex(p.polyval(x, c)) for c in ca]
        b = [complex(p.polyval(x, c)) for c in cb]
        cands = []
        for quad in (a, b):
            if abs(quad[0]) > 1e-12:
                cands.extend(np.roots(quad))
            elif abs(quad[1]) > 1e-12:
                cands.append(-quad[2] / quad[1])

        def both(z):
            return abs(a[0] * z * z + a[1] * z + a[2]) + abs(b[0] * z * z + b[1] * z + b[2])

        cands.sort(key=both)
        zs = [cands[0]]
        if mult >= 2 and len(cands) > 1:
            # two distinct points sharing an X-value would both be common roots
            for z in cands[1:]:
                if abs(z - zs[0]) > 1e-6 * max(1.0, abs(z)) and both(z) < 1e-8:
                    zs.append(z)
                    break
        share = [mult // len(zs)] * len(zs)
        share[0] += mult - sum(share)
        for z, m in zip(zs, share):
            y = frame @ np.array([x, 1.0, z])
            y = _polish_conic_point(fa, fb, np.array([x, 1.0, z]), frame) if m == 1 else y
            out.append((ProjPoint(e @ y), m))
    return out


def _polish_conic_point(fa, fb, y, frame, iters=4):
    """Newton steps on the two conic equations with the middle coordinate fixed."""
    y = y.astype(complex)
    for _ in range(iters):
        f = np.array([y @ fa @ y, y @ fb @ y])
        jac = np.array([2 * (fa @ y)[[0, 2]], 2 * (fb @ y)[[0, 2]]])
        try:
            d = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            break
        y[0] += d[0]
        y[2] += d[1]
        if np.max(np.abs(d)) < 1e-15 * max(1.0, np.max(np.abs(y))):
            break
    return frame @ y


# ---------------------------------------------------------------------------
# quadratic forms in three variables

_MONOMIALS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def quadratic_design(directions):
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    cols = []
    for i, j in _MONOMIALS:
        cols.append(d[:, i] * d[:, j] * (1.0 if i == j else 2.0))
    return np.column_stack(cols)


def form_from_coeffs(c):
    g = np.empty((3, 3))
    for k, (i, j) in enumerate(_MONOMIALS):
        g[i, j] = g[j, i] = c[k]
    return g


def fit_quadratic_form(directions, values):
    """Least-squares symmetric 3x3 form G with d^T G d ~ value.

    Returns ``(G, relative_residual)``; the residual is measured against the
    norm of the sample values.
    """
    design = quadratic_design(directions)
    values = np.asarray(values, dtype=float)
    if design.shape[0] < 6 or np.linalg.matrix_rank(design) < 6:
        raise DegenerateInput("sample directions do not determine a quadratic form")
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    resid = np.linalg.norm(design @ coef - values)
    scale = np.linalg.norm(values)
    return form_from_coeffs(coef), float(resid / scale) if scale > 0 else float(resid)
