"""Reference grids, moving meshes, and metric terms of the coordinate map.

The physical domain is the unit square.  A mesh is the image of the uniform
reference grid (xi_m, eta_n) under a time-dependent map (x, y); all fields in
the solver live on the (M, N) index set of that grid, with axis 0 running
along xi and axis 1 along eta.

All functions here are pure: they never mutate their inputs, so values can be
shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MeshFoldedError

__all__ = [
    "ReferenceGrid",
    "MovingMesh",
    "MetricTerms",
    "MeshMotion",
    "uniform_mesh",
    "compute_metrics",
    "jacobian_field",
    "min_jacobian",
    "mesh_at_time",
    "refine_uniform",
    "diff_xi",
    "diff_eta",
]


@dataclass(frozen=True)
class ReferenceGrid:
    """Uniform reference grid on the unit square.

    M, N are node counts along xi and eta; spacings are 1/(M-1), 1/(N-1)
    so that node (m, n) sits at (m*dxi, n*deta) with 0-based indices.
    """

    M: int
    N: int

    def __post_init__(self):
        if self.M < 3 or self.N < 3:
            raise ValueError(f"grid must be at least 3x3, got {self.M}x{self.N}")

    @property
    def dxi(self) -> float:
        return 1.0 / (self.M - 1)

    @property
    def deta(self) -> float:
        return 1.0 / (self.N - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.M, self.N)

    def xi_eta(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodal reference coordinates as (M, N) arrays."""
        xi = np.linspace(0.0, 1.0, self.M)
        eta = np.linspace(0.0, 1.0, self.N)
        return np.meshgrid(xi, eta, indexing="ij")


@dataclass(frozen=True)
class MovingMesh:
    """Physical node coordinates over a reference grid at one time instant."""

    grid: ReferenceGrid
    x: np.ndarray
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.x.shape != self.grid.shape or self.y.shape != self.grid.shape:
            raise ValueError(
                f"coordinate arrays {self.x.shape} do not match grid {self.grid.shape}"
            )

    def with_time(self, t: float) -> "MovingMesh":
        return MovingMesh(self.grid, self.x, self.y, t)


@dataclass(frozen=True)
class MetricTerms:
    """Nodal metric terms of the map from reference to physical coordinates.

    jac is x_xi*y_eta - x_eta*y_xi; (a11, a12, a22) is the symmetric
    diffusion-metric tensor and (b1, b2) the mesh-motion convection vector
    of the transformed equations.
    """

    x_xi: np.ndarray
    x_eta: np.ndarray
    y_xi: np.ndarray
    y_eta: np.ndarray
    jac: np.ndarray
    a11: np.ndarray
    a12: np.ndarray
    a22: np.ndarray
    b1: np.ndarray
    b2: np.ndarray


@dataclass(frozen=True)
class MeshMotion:
    """A mesh step: node positions at t_n and t_n + dt with linear motion."""

    mesh_n: MovingMesh
    mesh_np1: MovingMesh
    dt: float

    def __post_init__(self):
        if self.mesh_n.grid != self.mesh_np1.grid:
            raise ValueError("meshes in a motion must share the reference grid")
        if self.dt <= 0.0:
            raise ValueError("motion step size must be positive")

    @property
    def t_n(self) -> float:
        return self.mesh_n.t

    @property
    def is_static(self) -> bool:
        return self.mesh_n.x is self.mesh_np1.x or (
            np.array_equal(self.mesh_n.x, self.mesh_np1.x)
            and np.array_equal(self.mesh_n.y, self.mesh_np1.y)
        )

    def velocity(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodal mesh velocity implied by the linear-in-time motion."""
        if self.is_static:
            z = np.zeros_like(self.mesh_n.x)
            return z, z
        vx = (self.mesh_np1.x - self.mesh_n.x) / self.dt
        vy = (self.mesh_np1.y - self.mesh_n.y) / self.dt
        return vx, vy


def static_motion(mesh: MovingMesh, dt: float) -> MeshMotion:
    """Motion record for a mesh that does not move over the step."""
    return MeshMotion(mesh, mesh.with_time(mesh.t + dt), dt)


def uniform_mesh(grid: ReferenceGrid, t: float = 0.0) -> MovingMesh:
    """Identity map: physical nodes coincide with the reference grid."""
    x, y = grid.xi_eta()
    return MovingMesh(grid, x, y, t)


def diff_xi(f: np.ndarray, dxi: float) -> np.ndarray:
    """d/dxi by central differences, second-order one-sided at m=0, M-1."""
    g = np.empty_like(f)
    g[1:-1, :] = (f[2:, :] - f[:-2, :]) / (2.0 * dxi)
    g[0, :] = (-3.0 * f[0, :] + 4.0 * f[1, :] - f[2, :]) / (2.0 * dxi)
    g[-1, :] = (3.0 * f[-1, :] - 4.0 * f[-2, :] + f[-3, :]) / (2.0 * dxi)
    return g


def diff_eta(f: np.ndarray, deta: float) -> np.ndarray:
    """d/deta by central differences, second-order one-sided at n=0, N-1."""
    g = np.empty_like(f)
    g[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * deta)
    g[:, 0] = (-3.0 * f[:, 0] + 4.0 * f[:, 1] - f[:, 2]) / (2.0 * deta)
    g[:, -1] = (3.0 * f[:, -1] - 4.0 * f[:, -2] + f[:, -3]) / (2.0 * deta)
    return g


def jacobian_field(mesh: MovingMesh) -> np.ndarray:
    """Nodal Jacobian of the mesh without validity checking."""
    dxi, deta = mesh.grid.dxi, mesh.grid.deta
    x_xi = diff_xi(mesh.x, dxi)
    x_eta = diff_eta(mesh.x, deta)
    y_xi = diff_xi(mesh.y, dxi)
    y_eta = diff_eta(mesh.y, deta)
    return x_xi * y_eta - x_eta * y_xi


def compute_metrics(
    mesh: MovingMesh,
    velocity: tuple[np.ndarray, np.ndarray] | None = None,
    require_valid: bool = True,
) -> MetricTerms:
    """Metric terms of the mesh, with convection from the given mesh velocity.

    velocity is a (vx, vy) pair of nodal arrays; None means a static mesh.
    With require_valid, the first node with J <= 0 raises MeshFoldedError.
    """
    dxi, deta = mesh.grid.dxi, mesh.grid.deta
    x_xi = diff_xi(mesh.x, dxi)
    x_eta = diff_eta(mesh.x, deta)
    y_xi = diff_xi(mesh.y, dxi)
    y_eta = diff_eta(mesh.y, deta)
    jac = x_xi * y_eta - x_eta * y_xi
    if require_valid and np.any(jac <= 0.0):
        flat = int(np.argmax(jac <= 0.0))
        m, n = divmod(flat, mesh.grid.N)
        raise MeshFoldedError(m, n, float(jac[m, n]), "compute_metrics")

    inv_j = 1.0 / jac
    a11 = (x_eta**2 + y_eta**2) * inv_j
    a12 = -(x_xi * x_eta + y_xi * y_eta) * inv_j
    a22 = (x_xi**2 + y_xi**2) * inv_j
    if velocity is None:
        b1 = np.zeros_like(jac)
        b2 = np.zeros_like(jac)
    else:
        vx, vy = velocity
        b1 = (y_eta * vx - x_eta * vy) * inv_j
        b2 = (-y_xi * vx + x_xi * vy) * inv_j
    return MetricTerms(x_xi, x_eta, y_xi, y_eta, jac, a11, a12, a22, b1, b2)


def min_jacobian(metrics: MetricTerms) -> float:
    """Minimum nodal Jacobian; the mesh-validity gauge."""
    return float(metrics.jac.min())


def mesh_at_time(motion: MeshMotion, t: float) -> MovingMesh:
    """Mesh at an intermediate time of a step, linear in t between endpoints."""
    t_n, dt = motion.t_n, motion.dt
    slack = 1e-12 * max(1.0, abs(t_n) + dt)
    if t < t_n - slack or t > t_n + dt + slack:
        raise ValueError(f"time {t} outside step [{t_n}, {t_n + dt}]")
    if t <= t_n:
        return motion.mesh_n
    if t >= t_n + dt:
        return motion.mesh_np1
    theta = (t - t_n) / dt
    x = theta * motion.mesh_np1.x + (1.0 - theta) * motion.mesh_n.x
    y = theta * motion.mesh_np1.y + (1.0 - theta) * motion.mesh_n.y
    return MovingMesh(motion.mesh_n.grid, x, y, t)


def refine_uniform(coarse: MovingMesh, factor: int) -> MovingMesh:
    """Bilinear refinement of a mesh by an integer factor.

    The fine grid has factor*(M-1)+1 by factor*(N-1)+1 nodes; coarse nodes
    carry over exactly and inserted nodes are the bilinear interpolant of the
    surrounding coarse cell corners in reference space.
    """
    if factor < 2:
        raise ValueError(f"refinement factor must be >= 2, got {factor}")
    r = int(factor)
    M, N = coarse.grid.shape
    Mf, Nf = r * (M - 1) + 1, r * (N - 1) + 1
    fine_grid = ReferenceGrid(Mf, Nf)

    def interp(c: np.ndarray) -> np.ndarray:
        f = np.empty((Mf, Nf), dtype=c.dtype)
        f[::r, ::r] = c
        for i in range(r):
            s = i / r
            for j in range(r):
                if i == 0 and j == 0:
                    continue
                t = j / r
                if i > 0 and j > 0:
                    blk = (
                        (1 - s) * (1 - t) * c[:-1, :-1]
                        + s * (1 - t) * c[1:, :-1]
                        + (1 - s) * t * c[:-1, 1:]
                        + s * t * c[1:, 1:]
                    )
                    f[i::r, j::r] = blk
                elif i > 0:
                    f[i::r, ::r] = (1 - s) * c[:-1, :] + s * c[1:, :]
                else:
                    f[::r, j::r] = (1 - t) * c[:, :-1] + t * c[:, 1:]
        return f

    fine = MovingMesh(fine_grid, interp(coarse.x), interp(coarse.y), coarse.t)
    jac = jacobian_field(fine)
    if np.any(jac <= 0.0):
        flat = int(np.argmax(jac <= 0.0))
        m, n = divmod(flat, Nf)
        raise MeshFoldedError(m, n, float(jac[m, n]), "refine_uniform")
    return fine


def trapezoid_weights(M: int, N: int) -> np.ndarray:
    """Tensor-product trapezoidal quadrature weights on the reference grid."""
    wx = np.ones(M)
    wx[0] = wx[-1] = 0.5
    wy = np.ones(N)
    wy[0] = wy[-1] = 0.5
    return np.outer(wx, wy)
