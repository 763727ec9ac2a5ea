"""Independent oracles used by the test suite.

Each oracle recomputes a quantity the engine produces, through a
different algorithm (graph shortest paths, dense sampling, direct
enumeration), so engine and oracle cannot share a bug in the checked
path.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from crowdkit.geometry import Point2, contains_point, distance_to_shape

# 16-neighborhood: axis, diagonal and knight moves
NEIGHBORS_16 = ((1, 0), (-1, 0), (0, 1), (0, -1),
                (1, 1), (1, -1), (-1, 1), (-1, -1),
                (2, 1), (2, -1), (-2, 1), (-2, -1),
                (1, 2), (1, -2), (-1, 2), (-1, -2))


def refined_dijkstra(topo, target_shapes, h: float, refine: int = 4):
    """Geodesic distances by Dijkstra on a refine-x finer 16-neighbor grid.

    Returns a (nx, ny) array aligned with the coarse cell-center grid:
    each coarse cell gets the min over the refined cells surrounding its
    center (inf where unreachable).
    """
    hf = h / refine
    nx = int(math.ceil(topo.bounds.width / h - 1e-9)) * refine
    ny = int(math.ceil(topo.bounds.height / h - 1e-9)) * refine
    ox, oy = topo.bounds.origin

    def center(i, j):
        return Point2(ox + (i + 0.5) * hf, oy + (j + 0.5) * hf)

    free = np.ones((nx, ny), dtype=bool)
    for i in range(nx):
        for j in range(ny):
            p = center(i, j)
            if any(contains_point(obs, p) for obs in topo.obstacles):
                free[i, j] = False

    dist = np.full((nx, ny), np.inf)
    heap = []
    for i in range(nx):
        for j in range(ny):
            if free[i, j] and any(contains_point(t, center(i, j))
                                  for t in target_shapes):
                dist[i, j] = 0.0
                heap.append((0.0, i, j))
    heapq.heapify(heap)

    def edge_clear(i0, j0, i1, j1):
        # sample the segment between cell centers against the obstacles
        a, b = center(i0, j0), center(i1, j1)
        for t in np.linspace(0.0, 1.0, 9):
            p = Point2(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
            if any(contains_point(obs, p) for obs in topo.obstacles):
                return False
        return True

    costs = {off: math.hypot(*off) * hf for off in NEIGHBORS_16}
    while heap:
        d, i, j = heapq.heappop(heap)
        if d > dist[i, j]:
            continue
        for off in NEIGHBORS_16:
            i1, j1 = i + off[0], j + off[1]
            if not (0 <= i1 < nx and 0 <= j1 < ny) or not free[i1, j1]:
                continue
            nd = d + costs[off]
            if nd < dist[i1, j1] and edge_clear(i, j, i1, j1):
                dist[i1, j1] = nd
                heapq.heappush(heap, (nd, i1, j1))

    cx, cy = nx // refine, ny // refine
    coarse = np.full((cx, cy), np.inf)
    m = refine // 2
    for i in range(cx):
        for j in range(cy):
            block = dist[refine * i + m - 1: refine * i + m + 1,
                         refine * j + m - 1: refine * j + m + 1]
            coarse[i, j] = block.min()
    return coarse


def brute_force_disc_argmin(agent, neighbors, ff, topo, params, samples=200):
    """Dense enumeration of the aggregated potential over the step disc.

    Independent re-derivation of the kernels and rejection rules; returns
    (best value, best point, max finite adjacent-sample difference) for
    spacing-scaled tolerance checks.
    """
    s = agent.step_length
    xs = np.linspace(agent.position.x - s, agent.position.x + s, samples)
    ys = np.linspace(agent.position.y - s, agent.position.y + s, samples)
    values = np.full((samples, samples), np.inf)
    p = params
    r = agent.torso_radius

    def kernel(d, width, height):
        if d >= width or width <= 0:
            return 0.0
        return height * math.exp(2.0 * d * d / (d * d - width * width))

    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if math.hypot(x - agent.position.x, y - agent.position.y) > s:
                continue
            pt = Point2(x, y)
            if not topo.bounds.contains(pt):
                continue
            u = ff.sample(pt)
            if math.isinf(u):
                continue
            total = u
            rejected = False
            for other in neighbors:
                if other.id == agent.id:
                    continue
                d = math.hypot(other.position.x - x, other.position.y - y)
                rsum = r + other.torso_radius
                if d < rsum:
                    rejected = True
                    break
                total += (kernel(d, p.delta_per, p.h_per)
                          + kernel(d, p.delta_int, p.h_int)
                          + kernel(d, rsum, p.h_tor))
            if rejected:
                continue
            obs_term = 0.0
            for obs in topo.obstacles:
                d = distance_to_shape(pt, obs)
                if d < r:
                    rejected = True
                    break
                obs_term = max(obs_term, kernel(d - r, p.delta_obs - r, p.h_obs))
            if rejected:
                continue
            values[i, j] = total + obs_term

    best_flat = int(np.argmin(values))
    bi, bj = best_flat // samples, best_flat % samples
    finite = np.isfinite(values)
    max_step = 0.0
    with np.errstate(invalid="ignore"):
        both_x = finite[1:, :] & finite[:-1, :]
        if both_x.any():
            max_step = max(max_step,
                           np.abs(values[1:, :] - values[:-1, :])[both_x].max())
        both_y = finite[:, 1:] & finite[:, :-1]
        if both_y.any():
            max_step = max(max_step,
                           np.abs(values[:, 1:] - values[:, :-1])[both_y].max())
    spacing = xs[1] - xs[0]
    return values[bi, bj], Point2(xs[bi], ys[bj]), max_step, spacing


def swept_disc_margin(start, end, radius, neighbors, topo, samples=1000):
    """Min clearance of a swept disc, by dense sampling along the segment.

    Positive margin: clear by that much; negative: collides. Sampling
    resolution bounds the error by half the sample spacing (the
    clearance is 1-Lipschitz along the segment).
    """
    margin = math.inf
    for t in np.linspace(0.0, 1.0, samples):
        p = Point2(start.x + t * (end.x - start.x), start.y + t * (end.y - start.y))
        for other in neighbors:
            d = math.hypot(other.position.x - p.x, other.position.y - p.y)
            margin = min(margin, d - (other.torso_radius + radius))
        for obs in topo.obstacles:
            margin = min(margin, distance_to_shape(p, obs) - radius)
    return margin


def polygon_edge_distance(p, vertices):
    """Min distance from p to the polygon boundary via its own projection
    arithmetic (no shared helper with the library)."""
    best = math.inf
    n = len(vertices)
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        denom = ex * ex + ey * ey
        t = 0.0 if denom == 0 else ((p[0] - ax) * ex + (p[1] - ay) * ey) / denom
        t = min(1.0, max(0.0, t))
        qx, qy = ax + t * ex, ay + t * ey
        best = min(best, math.hypot(p[0] - qx, p[1] - qy))
    return best
