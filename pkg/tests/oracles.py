"""Independent reference computations used by the tests.

None of these go through the code paths they check: the Hessian roots come
from the restricted Lagrangian form instead of the graph jet, and the section
topology from sign patterns on a dense grid instead of curve tracing.
"""

import math

import numpy as np
from scipy import ndimage
from scipy.special import gamma as gamma_fn

from minitwistor.segre import sphere_chart, sphere_grid, sphere_tangent_basis


# ---------------------------------------------------------------------------
# Hessian roots of the tangent pencil


def restricted_pencil_roots(S, p, frame):
    """Angles psi of pencil members a gradA + b gradB whose restricted form
    E^T (aA + bB) E on the tangent plane is degenerate."""
    w, t1, t2 = sphere_tangent_basis(S, p)
    E = np.column_stack([t1, t2])
    fa = E.T @ S.A_real @ E
    fb = E.T @ S.B_real @ E
    # det(a fa + b fb) = c2 a^2 + c1 ab + c0 b^2
    c2 = np.linalg.det(fa)
    c0 = np.linalg.det(fb)
    c1 = fa[0, 0] * fb[1, 1] + fa[1, 1] * fb[0, 0] - 2 * fa[0, 1] * fb[0, 1]
    roots = []
    scale = max(abs(c2), abs(c1), abs(c0))
    if abs(c2) <= 1e-13 * scale:
        # b (c1 a + c0 b) = 0
        roots.append((1.0, 0.0))
        if abs(c1) > 1e-13 * scale:
            roots.append((-c0, c1))
    else:
        for r in np.roots([c2, c1, c0]):
            roots.append((float(np.real(r)), 1.0))
    angles = []
    for a, b in roots:
        h = a * S.A_real @ w + b * S.B_real @ w
        angles.append(frame.angle_of(h))
    return sorted(angles)


# ---------------------------------------------------------------------------
# dense-grid topology of a hyperplane section of one sphere


class _Union:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def join(self, i, j):
        self.parent[self.find(i)] = self.find(j)


def _count_on_sphere(mask, structure=None):
    """Connected components of a (theta, phi) mask, phi periodic, and each
    end row collapsed to a pole."""
    lab, n = ndimage.label(mask, structure=structure)
    if n == 0:
        return 0
    u = _Union(n + 1)
    for i in range(mask.shape[0]):
        for di in (-1, 0, 1):
            k = i + di
            if 0 <= k < mask.shape[0] and lab[i, -1] and lab[k, 0]:
                u.join(lab[i, -1], lab[k, 0])
    for row in (0, mask.shape[0] - 1):
        ids = [x for x in lab[row] if x]
        for x in ids[1:]:
            u.join(ids[0], x)
    return len({u.find(k) for k in range(1, n + 1)})


def _chart_points(ch, th, ph):
    r = ch.radius(th)
    return np.stack([r * np.cos(ph), r * np.sin(ph), np.ones_like(th), np.cos(th), np.sin(th)], axis=-1)


def node_crossings(S, h, node, radii=(0.02, 0.01, 0.005), samples=4000):
    """Sign changes of h along small (theta, phi) circles around the node:
    4 for a crossing, 2 for a loop or cusp through it, 0 when isolated."""
    ch = sphere_chart(S, 1)
    w = np.asarray(node, dtype=float) / node[2]
    th0 = math.atan2(w[4], w[3])
    ph0 = math.atan2(w[1], w[0])
    r0 = max(float(ch.radius(th0)), 1e-6)
    t = np.linspace(0, 2 * math.pi, samples, endpoint=False)
    counts = []
    for rho in radii:
        f = _chart_points(ch, th0 + rho * np.cos(t), ph0 + rho * np.sin(t) / r0) @ np.asarray(h, dtype=float)
        s = np.sign(f)
        counts.append(int(np.sum(s != np.roll(s, 1))))
    return counts


def grid_topology(S, h, which, n=400, node=None, node_cells=3):
    """Sign-region count and zero-curve component count of the section h on
    sphere `which`, from an n x n (theta, phi) grid.

    The grid cannot resolve a crossing at the node, so cells within
    ``node_cells`` of a given node count as zero set: they join the curve
    mask and are left out of both sign regions.
    """
    ch = sphere_chart(S, which)
    thetas, phis, pts = sphere_grid(ch, n, n)
    f = pts @ np.asarray(h, dtype=float)
    pos = f > 0
    disk = np.zeros_like(pos)
    if node is not None:
        w = np.asarray(node, dtype=float) / node[2]
        i = int(np.argmin(np.abs(thetas - math.atan2(w[4], w[3]))))
        j = int(np.argmin(np.abs(phis - math.atan2(w[1], w[0]) % (2 * math.pi))))
        cols = [(j + k) % n for k in range(-node_cells, node_cells + 1)]
        disk[max(i - node_cells, 0):i + node_cells + 1, cols] = True
    edge = np.zeros_like(pos)
    edge[:-1, :] |= pos[:-1, :] != pos[1:, :]
    edge[:, :-1] |= pos[:, :-1] != pos[:, 1:]
    edge[:, -1] |= pos[:, -1] != pos[:, 0]
    if (edge & disk).any():
        edge |= disk
    else:
        disk[:] = False
    regions = _count_on_sphere(pos & ~disk) + _count_on_sphere(~pos & ~disk)
    curves = _count_on_sphere(edge, structure=np.ones((3, 3), dtype=int))
    return {"regions": regions, "curves": curves}


def brute_force_tag(S, h, node, n=400):
    """Figure8_S1, CuspLoop_S1, PointPlusCircle_S1/S2 or PointOnly from grid counts."""
    t1 = grid_topology(S, h, 1, n, node)
    t2 = grid_topology(S, h, 2, n)
    cross = node_crossings(S, h, node)
    if len(set(cross)) != 1:
        return f"Other(crossings {cross})"
    c = cross[0]
    if c == 4 and t1["curves"] == 1 and t1["regions"] == 3 and t2["curves"] == 0:
        return "Figure8_S1"
    if c == 2 and t1["curves"] == 1 and t1["regions"] == 2 and t2["curves"] == 0:
        return "CuspLoop_S1"
    if c == 0 and t1["curves"] == 1 and t2["curves"] == 0:
        return "PointPlusCircle_S1"
    if c == 0 and t1["curves"] == 0 and t2["curves"] == 1:
        return "PointPlusCircle_S2"
    if c == 0 and t1["curves"] == 0 and t2["curves"] == 0:
        return "PointOnly"
    return f"Other({cross}, {t1}, {t2})"


# ---------------------------------------------------------------------------
# closed-form plane curves


def lemniscate_length(a):
    """Length of (x^2 + y^2)^2 = 2 a^2 (x^2 - y^2): 2 sqrt(2) a times the lemniscate constant."""
    varpi = gamma_fn(0.25) ** 2 / (2 * math.sqrt(2 * math.pi))
    return 2 * math.sqrt(2) * a * varpi
