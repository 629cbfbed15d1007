"""Independent reference implementations used to check the library.

Everything here is deliberately written from first principles (Gram-Schmidt,
exhaustive enumeration, direct geometry) rather than by calling the package,
so the two routes to each value stay independent.
"""

import itertools

import numpy as np


def gs_kernel_projector(mat):
    """Kernel projector built from an explicit Gram-Schmidt kernel basis."""
    mat = np.asarray(mat, dtype=float)
    m, n = mat.shape
    # Orthonormalize the rows to get a row-space basis.
    row_basis = []
    for i in range(m):
        v = mat[i].astype(float).copy()
        for b in row_basis:
            v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-10 * max(1.0, np.linalg.norm(mat[i])):
            row_basis.append(v / nv)
    # Project the standard basis onto the orthocomplement of the row space.
    kernel_basis = []
    for j in range(n):
        v = np.zeros(n)
        v[j] = 1.0
        for b in row_basis:
            v -= (b @ v) * b
        for b in kernel_basis:
            v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-10:
            kernel_basis.append(v / nv)
    if not kernel_basis:
        return np.zeros((n, n))
    nb = np.stack(kernel_basis, axis=1)
    return nb @ nb.T


def brute_force_delta(mat):
    """Exhaustive max product of column norms over independent subsets."""
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[1]
    norms = np.linalg.norm(mat, axis=0)
    best = 1.0
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            sub = mat[:, subset]
            if np.linalg.matrix_rank(sub, tol=1e-9) == size:
                best = max(best, float(np.prod(norms[list(subset)])))
    return best


def sampled_width(metric_mat, direction, rng, samples=20000):
    """Monte-Carlo lower bound on max { direction . z : z^T R z <= 1 }."""
    m = metric_mat.shape[0]
    z = rng.standard_normal((samples, m))
    lengths = np.sqrt(np.einsum("ij,jk,ik->i", z, metric_mat, z))
    z = z / lengths[:, None]
    return float((z @ direction).max())


def convex_hull_2d(points):
    """Andrew monotone chain. Returns hull vertices in counterclockwise order."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return [np.array(p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return [np.array(p) for p in lower[:-1] + upper[:-1]]


def clip_polygon(subject, clip):
    """Sutherland-Hodgman clip of a convex polygon by a convex polygon."""
    output = list(subject)
    k = len(clip)
    for i in range(k):
        a, b = clip[i], clip[(i + 1) % k]
        edge = np.array([b[0] - a[0], b[1] - a[1]])

        def inside(p):
            return edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0]) >= -1e-14

        def intersect(p, q):
            d = np.array([q[0] - p[0], q[1] - p[1]])
            denom = edge[0] * d[1] - edge[1] * d[0]
            t = (edge[0] * (a[1] - p[1]) - edge[1] * (a[0] - p[0])) / denom
            return np.array([p[0] + t * d[0], p[1] + t * d[1]])

        current, output = output, []
        if not current:
            return []
        for j, q in enumerate(current):
            p = current[j - 1]
            if inside(q):
                if not inside(p):
                    output.append(intersect(p, q))
                output.append(q)
            elif inside(p):
                output.append(intersect(p, q))
    return output


def polygon_area(vertices):
    """Shoelace area of a polygon given in order."""
    if len(vertices) < 3:
        return 0.0
    area = 0.0
    k = len(vertices)
    for i in range(k):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % k]
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0


def symmetric_hull_intersection_area(mat):
    """Area of conv(normalized columns) intersected with its reflection.

    Only meaningful for m = 2 instances whose columns span the plane.
    """
    mat = np.asarray(mat, dtype=float)
    norms = np.linalg.norm(mat, axis=0)
    hat = mat[:, norms > 0] / norms[norms > 0]
    hull = convex_hull_2d(hat.T)
    neg = convex_hull_2d([-p for p in hull])
    inter = clip_polygon(hull, neg)
    return polygon_area(inter)


def margin_on_grid(mat, count=200000, rng=None):
    """Crude sampled lower bound on the signed margin (rank 2 and 3 inputs)."""
    mat = np.asarray(mat, dtype=float)
    norms = np.linalg.norm(mat, axis=0)
    hat = mat[:, norms > 0] / norms[norms > 0]
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    r = int(np.sum(s > 1e-9 * s[0]))
    basis = u[:, :r]
    if rng is None:
        rng = np.random.default_rng(0)
    if r == 1:
        dirs = np.array([[1.0], [-1.0]]).T
    else:
        dirs = rng.standard_normal((r, count))
        dirs /= np.linalg.norm(dirs, axis=0)
    vals = (basis.T @ hat).T @ dirs
    return float(vals.min(axis=0).max())
