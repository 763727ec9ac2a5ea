"""Floor fields: rasterized wave speed and arrival times from fast marching.

The arrival-time field u solves ||grad u|| * f = 1 with u = 0 on the
target region; f is 0 inside obstacles (the front stops, u stays
infinite there) and 1 on free space, optionally lowered where the crowd
is dense. Locomotion models sample u and its gradient at off-grid agent
positions through bilinear interpolation.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Point2, Shape
from .scenario import FloorFieldParams, Topography

INF = math.inf


class FloorFieldError(RuntimeError):
    pass


class OutOfBoundsError(FloorFieldError):
    pass


@dataclass
class ScalarGrid:
    """Cell-centered scalar samples over a regular grid.

    values[ix, iy] sits at origin + ((ix + 0.5) h, (iy + 0.5) h).
    """
    origin: Point2
    cell_size: float
    nx: int
    ny: int
    values: np.ndarray

    def __post_init__(self):
        assert self.values.shape == (self.nx, self.ny)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        h = self.cell_size
        xs = self.origin.x + (np.arange(self.nx) + 0.5) * h
        ys = self.origin.y + (np.arange(self.ny) + 0.5) * h
        return np.meshgrid(xs, ys, indexing="ij")

    def cell_center(self, ix: int, iy: int) -> Point2:
        h = self.cell_size
        return Point2(self.origin.x + (ix + 0.5) * h, self.origin.y + (iy + 0.5) * h)

    def cell_of(self, p: Point2) -> tuple[int, int]:
        h = self.cell_size
        ix = int((p.x - self.origin.x) / h)
        iy = int((p.y - self.origin.y) / h)
        return (min(max(ix, 0), self.nx - 1), min(max(iy, 0), self.ny - 1))

    def in_bounds(self, p: Point2) -> bool:
        return (self.origin.x <= p.x <= self.origin.x + self.nx * self.cell_size
                and self.origin.y <= p.y <= self.origin.y + self.ny * self.cell_size)


def _grid_dims(width: float, height: float, h: float) -> tuple[int, int]:
    nx = max(2, int(math.ceil(width / h - 1e-9)))
    ny = max(2, int(math.ceil(height / h - 1e-9)))
    return nx, ny


def make_grid(topo_bounds, h: float, fill: float = 0.0) -> ScalarGrid:
    nx, ny = _grid_dims(topo_bounds.width, topo_bounds.height, h)
    return ScalarGrid(topo_bounds.origin, h, nx, ny,
                      np.full((nx, ny), fill, dtype=float))


def _obstacle_mask(topo: Topography, grid: ScalarGrid) -> np.ndarray:
    xs, ys = grid.cell_centers()
    mask = np.zeros((grid.nx, grid.ny), dtype=bool)
    for obs in topo.obstacles:
        mask |= obs.contains_batch(xs, ys)
    return mask


def rasterize_speed(topo: Topography, h: float,
                    density: ScalarGrid | None = None,
                    params: FloorFieldParams | None = None) -> ScalarGrid:
    """Wave-speed grid: 0 on obstacle cells (center sampling), else 1,
    lowered to max(minSpeed, 1 - slope * density) in dynamic mode."""
    params = params or FloorFieldParams()
    nx, ny = _grid_dims(topo.bounds.width, topo.bounds.height, h)
    if nx * ny > params.cell_count_cap:
        raise FloorFieldError(
            f"grid of {nx}x{ny} cells exceeds the cell-count cap {params.cell_count_cap}")
    grid = make_grid(topo.bounds, h, fill=1.0)
    if density is not None:
        assert density.values.shape == grid.values.shape, "density grid must match"
        grid.values = np.maximum(params.min_speed,
                                 1.0 - params.density_slope * density.values)
    grid.values[_obstacle_mask(topo, grid)] = 0.0
    return grid


def solve_eikonal(speed: ScalarGrid, target_shapes: list[Shape],
                  record_acceptance: bool = False) -> "FloorField":
    """Fast-marching solve of the first-order upwind discretization.

    Processes cells in non-decreasing arrival-time order from the target
    cells outward; cells the front cannot reach keep u = +inf.
    """
    nx, ny, h = speed.nx, speed.ny, speed.cell_size
    n = nx * ny
    f_flat = speed.values.reshape(n).tolist()

    xs, ys = speed.cell_centers()
    target_mask = np.zeros((nx, ny), dtype=bool)
    for shape in target_shapes:
        target_mask |= shape.contains_batch(xs, ys)
    target_mask &= speed.values > 0.0
    seeds = np.flatnonzero(target_mask.reshape(n))
    if len(seeds) == 0:
        raise FloorFieldError("no reachable target cell (all covered by obstacles?)")

    u = [INF] * n
    state = bytearray(n)  # 0 far, 1 narrow, 2 accepted
    heap: list[tuple[float, int]] = []
    for idx in seeds:
        idx = int(idx)
        u[idx] = 0.0
        state[idx] = 1
        heap.append((0.0, idx))
    heapq.heapify(heap)

    order: list[float] = [] if record_acceptance else None
    push = heapq.heappush
    pop = heapq.heappop
    sqrt = math.sqrt

    while heap:
        val, idx = pop(heap)
        if state[idx] == 2:
            continue
        state[idx] = 2
        if order is not None:
            order.append(val)
        ix = idx // ny
        iy = idx - ix * ny
        # relax the four grid neighbors
        for m, ok in ((idx - ny, ix > 0), (idx + ny, ix < nx - 1),
                      (idx - 1, iy > 0), (idx + 1, iy < ny - 1)):
            if not ok or state[m] == 2:
                continue
            fm = f_flat[m]
            if fm <= 0.0:
                continue
            mx = m // ny
            # horizontal/vertical accepted-neighbor minima
            a = INF
            if mx > 0 and state[m - ny] == 2:
                a = u[m - ny]
            if mx < nx - 1 and state[m + ny] == 2 and u[m + ny] < a:
                a = u[m + ny]
            b = INF
            my = m - mx * ny
            if my > 0 and state[m - 1] == 2:
                b = u[m - 1]
            if my < ny - 1 and state[m + 1] == 2 and u[m + 1] < b:
                b = u[m + 1]
            cost = h / fm
            if a > b:
                a, b = b, a
            if b - a >= cost:  # 1D update from the smaller side
                new = a + cost
            else:
                diff = a - b
                new = 0.5 * (a + b + sqrt(2.0 * cost * cost - diff * diff))
            if new < u[m]:
                u[m] = new
                state[m] = 1
                push(heap, (new, m))

    grid = ScalarGrid(speed.origin, h, nx, ny,
                      np.array(u, dtype=float).reshape(nx, ny))
    return FloorField(grid=grid, acceptance_order=order)


def _bilinear_setup(grid: ScalarGrid, xs, ys):
    """Clamped base cell + unclamped offsets; extrapolates linearly in the
    half-cell edge band so linear fields are reproduced exactly."""
    h = grid.cell_size
    gx = (xs - grid.origin.x) / h - 0.5
    gy = (ys - grid.origin.y) / h - 0.5
    i0 = np.clip(np.floor(gx).astype(int), 0, grid.nx - 2)
    j0 = np.clip(np.floor(gy).astype(int), 0, grid.ny - 2)
    return i0, j0, gx - i0, gy - j0


def _bilinear_sample(values: np.ndarray, i0, j0, tx, ty) -> np.ndarray:
    v00 = values[i0, j0]
    v10 = values[i0 + 1, j0]
    v01 = values[i0, j0 + 1]
    v11 = values[i0 + 1, j0 + 1]
    bad = ~(np.isfinite(v00) & np.isfinite(v10) & np.isfinite(v01) & np.isfinite(v11))
    out = (v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty)
           + v01 * (1 - tx) * ty + v11 * tx * ty)
    if np.ndim(out) == 0:
        return np.float64(INF) if bad else out
    out[bad] = INF
    return out


@dataclass
class FloorField:
    """Arrival-time field toward one target, with interpolated access."""
    grid: ScalarGrid
    target_id: str = ""
    acceptance_order: list | None = None
    _gx: np.ndarray = field(default=None, repr=False)
    _gy: np.ndarray = field(default=None, repr=False)

    def _require_inside(self, p: Point2):
        if not self.grid.in_bounds(p):
            raise OutOfBoundsError(f"point ({p.x:g}, {p.y:g}) outside the floor-field grid")

    def sample(self, p: Point2) -> float:
        """Bilinear u at p; +inf as soon as the stencil touches an
        obstacle/unreachable cell."""
        self._require_inside(p)
        i0, j0, tx, ty = _bilinear_setup(self.grid, p.x, p.y)
        return float(_bilinear_sample(self.grid.values, i0, j0, tx, ty))

    def sample_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        i0, j0, tx, ty = _bilinear_setup(self.grid, xs, ys)
        return _bilinear_sample(self.grid.values, i0, j0, tx, ty)

    def _gradient_grids(self):
        if self._gx is None:
            u = self.grid.values
            h = self.grid.cell_size
            gx = np.full_like(u, np.nan)
            gy = np.full_like(u, np.nan)
            with np.errstate(invalid="ignore"):
                gx[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2 * h)
                gx[0, :] = (u[1, :] - u[0, :]) / h
                gx[-1, :] = (u[-1, :] - u[-2, :]) / h
                gy[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2 * h)
                gy[:, 0] = (u[:, 1] - u[:, 0]) / h
                gy[:, -1] = (u[:, -1] - u[:, -2]) / h
            # stencil touching an infinite cell flags the gradient invalid
            gx[~np.isfinite(gx)] = np.nan
            gy[~np.isfinite(gy)] = np.nan
            self._gx, self._gy = gx, gy
        return self._gx, self._gy

    def gradient(self, p: Point2) -> tuple[float, float, bool]:
        """Interpolated central-difference gradient; valid=False when the
        interpolation stencil touches an obstacle cell."""
        self._require_inside(p)
        gxg, gyg = self._gradient_grids()
        i0, j0, tx, ty = _bilinear_setup(self.grid, p.x, p.y)
        gx = _bilinear_sample(gxg, i0, j0, tx, ty)
        gy = _bilinear_sample(gyg, i0, j0, tx, ty)
        if not (np.isfinite(gx) and np.isfinite(gy)):
            return (0.0, 0.0, False)
        return (float(gx), float(gy), True)

    def descent_direction(self, p: Point2) -> tuple[float, float]:
        """Unit direction of steepest decrease of u at p.

        Falls back to pointing at the neighboring free cell with smallest
        u when the gradient stencil is blocked by an obstacle; returns the
        zero vector on the target plateau (arrival signal).
        """
        gx, gy, valid = self.gradient(p)
        if valid:
            norm = math.hypot(gx, gy)
            if norm < 1e-12:
                return (0.0, 0.0)
            return (-gx / norm, -gy / norm)
        u = self.grid.values
        ix, iy = self.grid.cell_of(p)
        own = u[ix, iy]
        best = None
        best_u = own if math.isfinite(own) else INF
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1),
                       (1, 1), (1, -1), (-1, 1), (-1, -1)):
            jx, jy = ix + dx, iy + dy
            if 0 <= jx < self.grid.nx and 0 <= jy < self.grid.ny:
                v = u[jx, jy]
                if v < best_u:
                    best_u = v
                    best = (dx, dy)
        if best is None:
            return (0.0, 0.0)
        norm = math.hypot(best[0], best[1])
        return (best[0] / norm, best[1] / norm)


def compute_density(positions, grid_like: ScalarGrid, kernel_radius: float) -> ScalarGrid:
    """Gaussian-kernel crowd density (persons/m^2) on the given grid layout.

    Each agent contributes a truncated Gaussian bump normalized so its
    grid integral is exactly one person.
    """
    assert kernel_radius > 0
    h = grid_like.cell_size
    nx, ny = grid_like.nx, grid_like.ny
    values = np.zeros((nx, ny))
    sigma = kernel_radius / 2.0
    reach = int(math.ceil(kernel_radius / h)) + 1
    cell_area = h * h
    for px, py in positions:
        cx = int((px - grid_like.origin.x) / h)
        cy = int((py - grid_like.origin.y) / h)
        x0, x1 = max(0, cx - reach), min(nx, cx + reach + 1)
        y0, y1 = max(0, cy - reach), min(ny, cy + reach + 1)
        if x0 >= x1 or y0 >= y1:
            continue
        xs = grid_like.origin.x + (np.arange(x0, x1) + 0.5) * h
        ys = grid_like.origin.y + (np.arange(y0, y1) + 0.5) * h
        d2 = (xs[:, None] - px) ** 2 + (ys[None, :] - py) ** 2
        w = np.exp(-d2 / (2 * sigma * sigma))
        w[d2 > kernel_radius ** 2] = 0.0
        total = w.sum() * cell_area
        if total > 0:
            values[x0:x1, y0:y1] += w / total
    return ScalarGrid(grid_like.origin, h, nx, ny, values)


def export_grid_csv(grid: ScalarGrid, stream) -> None:
    """Write `x,y,value` rows (cell centers); infinite cells print `inf`."""
    stream.write("x,y,value\n")
    h = grid.cell_size
    for ix in range(grid.nx):
        x = grid.origin.x + (ix + 0.5) * h
        for iy in range(grid.ny):
            y = grid.origin.y + (iy + 0.5) * h
            v = grid.values[ix, iy]
            txt = "inf" if math.isinf(v) else format(v, ".12g")
            stream.write(f"{x:.12g},{y:.12g},{txt}\n")
