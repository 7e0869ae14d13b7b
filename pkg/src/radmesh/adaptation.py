"""Variational mesh adaptation: monitor construction from a recovered
Hessian, the equidistribution-alignment functional, its exact discrete
gradient, and the gradient-flow mesh motion with boundary adaptation.

The mesh functional is discretized with trapezoidal quadrature; its gradient
with respect to the nodal coordinates is computed analytically (adjoint of
the quadrature and differencing), so descent of the discrete functional is a
checkable property of every accepted mesh step.  Inside this module the
coordinate-map derivatives use first-order one-sided differences at the
boundary rows; paired with the trapezoid weights this summation-by-parts
combination makes the uniform mesh an exact critical point under a constant
monitor, while interior nodes see the usual central differences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import MeshFoldedError
from .grid import MovingMesh, jacobian_field, refine_uniform, trapezoid_weights

__all__ = [
    "HessianField",
    "MonitorField",
    "MeshingParams",
    "recover_hessian",
    "absolute_hessian",
    "compute_alpha",
    "monitor_function",
    "smooth_monitor",
    "build_monitor",
    "functional_value",
    "coordinate_gradient",
    "functional_gradient",
    "mmpde_step",
    "move_boundary_points",
    "advance_mesh",
    "two_level_cycle",
]

log = logging.getLogger(__name__)

_DESCENT_SLACK = 1e-12
_SUBSTEP_BUDGET = 60


@dataclass(frozen=True)
class HessianField:
    """Nodal symmetric 2x2 matrices [[h11, h12], [h12, h22]]."""

    h11: np.ndarray
    h12: np.ndarray
    h22: np.ndarray

    def eigenvalues(self) -> tuple[np.ndarray, np.ndarray]:
        mean = 0.5 * (self.h11 + self.h22)
        dev = np.hypot(0.5 * (self.h11 - self.h22), self.h12)
        return mean + dev, mean - dev


@dataclass(frozen=True)
class MonitorField:
    """Nodal SPD monitor tensors with their regularization parameter."""

    m11: np.ndarray
    m12: np.ndarray
    m22: np.ndarray
    alpha: float

    def det(self) -> np.ndarray:
        return self.m11 * self.m22 - self.m12**2


@dataclass(frozen=True)
class MeshingParams:
    """Knobs of the mesh motion: response time tau, functional balance
    theta, smoothing sweeps, and mesh sub-steps per physical step."""

    tau: float = 0.01
    theta: float = 0.1
    smoothing_sweeps: int = 4
    mesh_substeps: int = 1

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if not (0.0 < self.theta <= 0.5):
            raise ValueError("theta must lie in (0, 1/2]")
        if self.smoothing_sweeps < 0 or self.mesh_substeps < 1:
            raise ValueError("sweeps must be >= 0 and substeps >= 1")


# ---------------------------------------------------------------------------
# Hessian recovery


def recover_hessian(E: np.ndarray, mesh: MovingMesh) -> HessianField:
    """Nodal Hessian of E by local quadratic least-squares fits.

    Each node fits c0 + c1 x + c2 y + c3 x^2 + c4 xy + c5 y^2 over its 3x3
    index neighborhood (shifted one-sided at boundaries), centered and scaled
    for conditioning.  Rank-deficient fits fall back to a zero Hessian.
    """
    x, y = mesh.x, mesh.y
    M, N = E.shape
    lo_m = np.clip(np.arange(M) - 1, 0, M - 3)
    lo_n = np.clip(np.arange(N) - 1, 0, N - 3)

    xs = np.empty((M, N, 9))
    ys = np.empty((M, N, 9))
    es = np.empty((M, N, 9))
    k = 0
    for i in range(3):
        im = lo_m + i
        for j in range(3):
            jn = lo_n + j
            sel = np.ix_(im, jn)
            xs[:, :, k] = x[sel]
            ys[:, :, k] = y[sel]
            es[:, :, k] = E[sel]
            k += 1

    dx = xs - x[:, :, None]
    dy = ys - y[:, :, None]
    h = np.maximum(np.abs(dx).max(axis=2), np.abs(dy).max(axis=2))
    h = np.maximum(h, 1e-300)
    sx = dx / h[:, :, None]
    sy = dy / h[:, :, None]

    design = np.stack(
        [np.ones_like(sx), sx, sy, sx * sx, sx * sy, sy * sy], axis=-1
    )  # (M, N, 9, 6)
    normal = np.einsum("mnka,mnkb->mnab", design, design)
    rhs = np.einsum("mnka,mnk->mna", design, es)

    try:
        coef = np.linalg.solve(normal, rhs[..., None])[..., 0]
        resid = rhs - np.einsum("mnab,mnb->mna", normal, coef)
        coef = coef + np.linalg.solve(normal, resid[..., None])[..., 0]
    except np.linalg.LinAlgError:
        coef = _solve_fits_node_by_node(normal, rhs)

    bad = ~np.isfinite(coef).all(axis=-1)
    if np.any(bad):
        log.warning("zero-Hessian fallback at %d degenerate nodes", int(bad.sum()))
        coef[bad] = 0.0

    h2 = h * h
    h11 = 2.0 * coef[..., 3] / h2
    h12 = coef[..., 4] / h2
    h22 = 2.0 * coef[..., 5] / h2
    # entries below the fit's own roundoff floor are not measurements; left
    # in, the determinant normalization of the monitor would blow this noise
    # up into order-one spurious anisotropy on near-constant fields
    floor = 1e3 * np.finfo(float).eps * np.abs(es).max(axis=2) / h2
    for arr in (h11, h12, h22):
        arr[np.abs(arr) <= floor] = 0.0
    return HessianField(h11, h12, h22)


def _solve_fits_node_by_node(normal: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    M, N = normal.shape[:2]
    coef = np.zeros(rhs.shape)
    fallbacks = 0
    for m in range(M):
        for n in range(N):
            try:
                coef[m, n] = np.linalg.solve(normal[m, n], rhs[m, n])
            except np.linalg.LinAlgError:
                fallbacks += 1
    if fallbacks:
        log.warning("zero-Hessian fallback at %d degenerate nodes", fallbacks)
    return coef


def absolute_hessian(H: HessianField) -> HessianField:
    """Matrix absolute value |H| = Q diag(|l1|, |l2|) Q^T, nodewise."""
    mean = 0.5 * (H.h11 + H.h22)
    dev = np.hypot(0.5 * (H.h11 - H.h22), H.h12)
    lam1, lam2 = mean + dev, mean - dev
    p = 0.5 * (np.abs(lam1) + np.abs(lam2))
    safe = np.where(dev > 0.0, dev, 1.0)
    q = np.where(dev > 0.0, 0.5 * (np.abs(lam1) - np.abs(lam2)) / safe, 0.0)
    return HessianField(
        p + q * (H.h11 - mean),
        q * H.h12,
        p + q * (H.h22 - mean),
    )


# ---------------------------------------------------------------------------
# Monitor construction


def _physical_quadrature(mesh: MovingMesh, f: np.ndarray) -> float:
    """Trapezoidal integral of a nodal field over the physical domain."""
    w = trapezoid_weights(*mesh.grid.shape)
    jac = jacobian_field(mesh)
    return float(np.sum(w * f * jac) * mesh.grid.dxi * mesh.grid.deta)


_ANISOTROPY_FLOOR = 1e-3


def compute_alpha(absH: HessianField, mesh: MovingMesh, rel_tol: float = 1e-12) -> float:
    """Regularization level at which the monitor doubles its total density.

    Solves int det(M(alpha))^(1/2) = 2 int det(M(0))^(1/2) by bisection;
    the left side is strictly increasing in alpha so the root is unique.
    An identically zero |H| has no positive root and falls back to alpha=1.

    For quasi-one-dimensional fields the smaller Hessian eigenvalue is pure
    recovery noise, det(M(0)) with it, and the nominal root collapses toward
    zero, which makes the monitor numerically singular.  The result is
    therefore floored at a small fraction of the largest curvature, capping
    the monitor anisotropy instead of letting noise set it.
    """
    l1, l2 = absH.eigenvalues()
    l1 = np.maximum(l1, 0.0)
    l2 = np.maximum(l2, 0.0)
    target = 2.0 * _physical_quadrature(mesh, (l1 * l2) ** 0.25)
    if target <= 0.0:
        # covers |H| = 0 and exactly one-dimensional fields (det |H| = 0)
        log.info("monitor normalization degenerate (zero right side); alpha = 1")
        return 1.0
    floor = _ANISOTROPY_FLOOR * float(l1.max())

    def total(alpha: float) -> float:
        return _physical_quadrature(mesh, ((alpha + l1) * (alpha + l2)) ** 0.25)

    hi = max(float(np.mean(l1 + l2)), 1e-8)
    for _ in range(200):
        if total(hi) >= target:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the monitor regularization level")
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if total(mid) >= target:
            hi = mid
        else:
            lo = mid
    return max(0.5 * (lo + hi), floor)


def monitor_function(absH: HessianField, alpha: float) -> MonitorField:
    """Monitor det(alpha I + |H|)^(-1/4) (alpha I + |H|), nodewise."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    b11 = alpha + absH.h11
    b22 = alpha + absH.h22
    b12 = absH.h12
    det = b11 * b22 - b12**2
    fac = det**-0.25
    return MonitorField(fac * b11, fac * b12, fac * b22, alpha)


def smooth_monitor(mon: MonitorField, sweeps: int) -> MonitorField:
    """Low-pass filtering of each tensor entry with the 1-2-1 kernel.

    Boundary nodes use reflected neighbors; the filter is a convex
    combination, so SPD is preserved.
    """
    if sweeps == 0:
        return mon

    def filt(f: np.ndarray) -> np.ndarray:
        for _ in range(sweeps):
            p = np.pad(f, 1, mode="reflect")
            f = (
                4.0 * p[1:-1, 1:-1]
                + 2.0 * (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:])
                + p[:-2, :-2]
                + p[:-2, 2:]
                + p[2:, :-2]
                + p[2:, 2:]
            ) / 16.0
        return f

    return MonitorField(filt(mon.m11), filt(mon.m12), filt(mon.m22), mon.alpha)


def build_monitor(E: np.ndarray, mesh: MovingMesh, params: MeshingParams) -> MonitorField:
    """Full monitor pipeline: Hessian recovery, |H|, regularization, smoothing."""
    H = recover_hessian(E, mesh)
    A = absolute_hessian(H)
    alpha = compute_alpha(A, mesh)
    return smooth_monitor(monitor_function(A, alpha), params.smoothing_sweeps)


# ---------------------------------------------------------------------------
# Meshing functional and its exact discrete gradient


def _diff_xi_flow(f: np.ndarray, dxi: float) -> np.ndarray:
    g = np.empty_like(f)
    g[1:-1, :] = (f[2:, :] - f[:-2, :]) / (2.0 * dxi)
    g[0, :] = (f[1, :] - f[0, :]) / dxi
    g[-1, :] = (f[-1, :] - f[-2, :]) / dxi
    return g


def _diff_eta_flow(f: np.ndarray, deta: float) -> np.ndarray:
    g = np.empty_like(f)
    g[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2.0 * deta)
    g[:, 0] = (f[:, 1] - f[:, 0]) / deta
    g[:, -1] = (f[:, -1] - f[:, -2]) / deta
    return g


def _diff_xi_flow_T(w: np.ndarray, dxi: float) -> np.ndarray:
    """Transpose of _diff_xi_flow as a linear map (adjoint scatter)."""
    g = np.zeros_like(w)
    c = 1.0 / (2.0 * dxi)
    g[2:, :] += c * w[1:-1, :]
    g[:-2, :] -= c * w[1:-1, :]
    g[0, :] += -w[0, :] / dxi
    g[1, :] += w[0, :] / dxi
    g[-1, :] += w[-1, :] / dxi
    g[-2, :] -= w[-1, :] / dxi
    return g


def _diff_eta_flow_T(w: np.ndarray, deta: float) -> np.ndarray:
    g = np.zeros_like(w)
    c = 1.0 / (2.0 * deta)
    g[:, 2:] += c * w[:, 1:-1]
    g[:, :-2] -= c * w[:, 1:-1]
    g[:, 0] += -w[:, 0] / deta
    g[:, 1] += w[:, 0] / deta
    g[:, -1] += w[:, -1] / deta
    g[:, -2] -= w[:, -1] / deta
    return g


def _functional_terms(mesh: MovingMesh, mon: MonitorField, theta: float, partials: bool):
    dxi, deta = mesh.grid.dxi, mesh.grid.deta
    a = _diff_xi_flow(mesh.x, dxi)
    b = _diff_eta_flow(mesh.x, deta)
    c = _diff_xi_flow(mesh.y, dxi)
    d = _diff_eta_flow(mesh.y, deta)
    jac = a * d - b * c
    if np.any(jac <= 0.0):
        flat = int(np.argmax(jac <= 0.0))
        m, n = divmod(flat, mesh.grid.N)
        raise MeshFoldedError(m, n, float(jac[m, n]), "meshing functional")

    det_m = mon.det()
    s = np.sqrt(det_m)
    i11 = mon.m22 / det_m
    i12 = -mon.m12 / det_m
    i22 = mon.m11 / det_m

    # P = J grad(xi) = (d, -b); Q = J grad(eta) = (-c, a)
    mp1 = i11 * d - i12 * b
    mp2 = i12 * d - i22 * b
    mq1 = -i11 * c + i12 * a
    mq2 = -i12 * c + i22 * a
    big_g = d * mp1 - b * mp2 - c * mq1 + a * mq2
    beta = big_g / jac**2

    k_eq = 4.0 * (1.0 - 2.0 * theta)
    phi = theta * s * beta**2 * jac + k_eq / (s * jac)
    if not partials:
        return phi, jac

    g_a, g_b, g_c, g_d = 2.0 * mq2, -2.0 * mp2, -2.0 * mq1, 2.0 * mp1
    j_a, j_b, j_c, j_d = d, -c, -b, a

    def phi_partial(g_x, j_x):
        beta_x = (g_x - 2.0 * beta * jac * j_x) / jac**2
        return theta * s * (2.0 * beta * beta_x * jac + beta**2 * j_x) - k_eq * j_x / (
            s * jac**2
        )

    return phi, jac, (
        phi_partial(g_a, j_a),
        phi_partial(g_b, j_b),
        phi_partial(g_c, j_c),
        phi_partial(g_d, j_d),
    ), (a, b, c, d)


def functional_value(mesh: MovingMesh, mon: MonitorField, theta: float = 0.1) -> float:
    """Discrete equidistribution-alignment functional of the mesh."""
    phi, _ = _functional_terms(mesh, mon, theta, partials=False)
    w = trapezoid_weights(*mesh.grid.shape)
    return float(np.sum(w * phi) * mesh.grid.dxi * mesh.grid.deta)


def _gradient_fields(mesh: MovingMesh, mon: MonitorField, theta: float):
    """One evaluation of everything the gradient forms need:
    (ix, iy, d1, d2, a, b, c, d) with (ix, iy) the exact coordinate gradient
    and (d1, d2) the inverse-map functional derivatives."""
    dxi, deta = mesh.grid.dxi, mesh.grid.deta
    _, jac, (pa, pb, pc, pd), (a, b, c, d) = _functional_terms(
        mesh, mon, theta, partials=True
    )
    w = trapezoid_weights(*mesh.grid.shape)
    area = dxi * deta
    ix = area * (_diff_xi_flow_T(w * pa, dxi) + _diff_eta_flow_T(w * pb, deta))
    iy = area * (_diff_xi_flow_T(w * pc, dxi) + _diff_eta_flow_T(w * pd, deta))
    scale = -1.0 / (w * jac * area)
    d1 = scale * (a * ix + c * iy)
    d2 = scale * (b * ix + d * iy)
    return ix, iy, d1, d2, a, b, c, d


def coordinate_gradient(
    mesh: MovingMesh, mon: MonitorField, theta: float = 0.1
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient of functional_value with respect to nodal (x, y)."""
    ix, iy, *_ = _gradient_fields(mesh, mon, theta)
    return ix, iy


def functional_gradient(
    mesh: MovingMesh, mon: MonitorField, theta: float = 0.1
) -> tuple[np.ndarray, np.ndarray]:
    """Nodal functional derivatives (dI/dxi, dI/deta) of the inverse map.

    Obtained from the exact coordinate gradient through the kinematic
    relation between node motion and inverse-map perturbations; interior
    nodes reduce to the central discretization of the continuous
    divergence-form derivatives.
    """
    _, _, d1, d2, *_ = _gradient_fields(mesh, mon, theta)
    return d1, d2


def _flow_velocity(
    mesh: MovingMesh, mon: MonitorField, params: MeshingParams
) -> tuple[np.ndarray, np.ndarray]:
    """Node velocity (1/tau)(x_xi dI/dxi + x_eta dI/deta, ...): the descent
    flow of the functional expressed as physical node motion."""
    _, _, d1, d2, a, b, c, d = _gradient_fields(mesh, mon, params.theta)
    inv_tau = 1.0 / params.tau
    return inv_tau * (a * d1 + b * d2), inv_tau * (c * d1 + d * d2)


def _min_edge_length(x: np.ndarray, y: np.ndarray) -> float:
    exi = np.hypot(np.diff(x, axis=0), np.diff(y, axis=0)).min()
    eeta = np.hypot(np.diff(x, axis=1), np.diff(y, axis=1)).min()
    return float(min(exi, eeta))


def _integrate_flow(
    mesh: MovingMesh, mon: MonitorField, params: MeshingParams, dt: float
) -> MovingMesh | None:
    """Sub-cycled explicit descent over dt; None signals a fold.

    Each sub-step re-evaluates the flow velocity (monitor frozen) and is
    capped so no node moves more than a fifth of the smallest edge.  When the
    flow is stiff enough to exhaust the sub-step budget the partial
    relaxation is returned as the step: the mesh response is then budget
    limited instead of tau limited, which the descent and validity checks
    downstream still police.
    """
    x = mesh.x.copy()
    y = mesh.y.copy()
    remaining = dt
    for _ in range(_SUBSTEP_BUDGET):
        if remaining <= 1e-15 * dt:
            break
        cur = MovingMesh(mesh.grid, x, y, mesh.t)
        try:
            vx, vy = _flow_velocity(cur, mon, params)
        except MeshFoldedError:
            return None
        vmax = float(np.hypot(vx[1:-1, 1:-1], vy[1:-1, 1:-1]).max())
        cap = 0.2 * _min_edge_length(x, y)
        if vmax * remaining <= 1e-3 * cap:
            break
        sub = min(remaining, cap / vmax)
        x[1:-1, 1:-1] += sub * vx[1:-1, 1:-1]
        y[1:-1, 1:-1] += sub * vy[1:-1, 1:-1]
        remaining -= sub
    out = MovingMesh(mesh.grid, x, y, mesh.t)
    if np.any(jacobian_field(out) <= 0.0):
        return None
    return out


def mmpde_step(
    mesh: MovingMesh, mon: MonitorField, params: MeshingParams, dt: float, max_retries: int = 10
) -> MovingMesh:
    """Advance interior nodes down the functional's gradient flow over dt.

    The step is accepted only if the mesh stays valid and the frozen-monitor
    functional does not increase; otherwise the step size is halved and
    retried.  Persistent folding raises; persistent non-descent returns the
    unmoved mesh.
    """
    i0 = functional_value(mesh, mon, params.theta)
    dt_try = dt
    folded_last = False
    for _ in range(max_retries + 1):
        candidate = _integrate_flow(mesh, mon, params, dt_try)
        if candidate is None:
            folded_last = True
            dt_try *= 0.5
            continue
        folded_last = False
        try:
            i1 = functional_value(candidate, mon, params.theta)
        except MeshFoldedError:
            dt_try *= 0.5
            folded_last = True
            continue
        if i1 <= i0 + _DESCENT_SLACK:
            return candidate
        dt_try *= 0.5
    if folded_last:
        raise MeshFoldedError(-1, -1, float("nan"), f"mesh step failed after {max_retries} halvings")
    log.warning("mesh step made no descent progress; keeping nodes in place")
    return MovingMesh(mesh.grid, mesh.x.copy(), mesh.y.copy(), mesh.t)


# ---------------------------------------------------------------------------
# Boundary adaptation (1-D equidistribution along each edge)


def _edge_equidistribute(
    coords: np.ndarray, m_edge: np.ndarray, tau: float, dt: float, h_ref: float
) -> np.ndarray:
    """Backward-Euler step of u_t = (1/(tau m)) d/dxi(m_half du/dxi) with
    pinned endpoints; coefficients frozen at the step start."""
    K = coords.size
    mh = 0.5 * (m_edge[:-1] + m_edge[1:])
    r = dt / (tau * m_edge[1:-1] * h_ref**2)
    diag = np.ones(K)
    lower = np.zeros(K - 1)
    upper = np.zeros(K - 1)
    diag[1:-1] = 1.0 + r * (mh[1:] + mh[:-1])
    lower[:-1] = -r * mh[:-1]
    upper[1:] = -r * mh[1:]
    ab = np.zeros((3, K))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    out = solve_banded((1, 1), ab, coords)
    out[0], out[-1] = coords[0], coords[-1]  # corners are hard constraints
    return out


def _flow_valid(mesh: MovingMesh) -> bool:
    """Positive Jacobian in both differencing senses used by this package."""
    if np.any(jacobian_field(mesh) <= 0.0):
        return False
    dxi, deta = mesh.grid.dxi, mesh.grid.deta
    a = _diff_xi_flow(mesh.x, dxi)
    b = _diff_eta_flow(mesh.x, deta)
    c = _diff_xi_flow(mesh.y, dxi)
    d = _diff_eta_flow(mesh.y, deta)
    return bool(np.all(a * d - b * c > 0.0))


def _move_edges_once(
    mesh: MovingMesh, mon: MonitorField, params: MeshingParams, dt: float
) -> MovingMesh | None:
    """One implicit boundary step on all four edges; None when a node passes
    its neighbor or slides more than half its smallest gap."""
    M, N = mesh.grid.shape
    x = mesh.x.copy()
    y = mesh.y.copy()
    edges = (
        ("x", (slice(None), 0), np.sqrt(mon.m11[:, 0]), mesh.grid.dxi),
        ("x", (slice(None), N - 1), np.sqrt(mon.m11[:, N - 1]), mesh.grid.dxi),
        ("y", (0, slice(None)), np.sqrt(mon.m22[0, :]), mesh.grid.deta),
        ("y", (M - 1, slice(None)), np.sqrt(mon.m22[M - 1, :]), mesh.grid.deta),
    )
    for which, sel, m_edge, h_ref in edges:
        coords = x[sel] if which == "x" else y[sel]
        u = _edge_equidistribute(coords, m_edge, params.tau, dt, h_ref)
        if not np.all(np.diff(u) > 0.0):
            return None
        if float(np.abs(u - coords).max()) > 0.5 * float(np.diff(coords).min()):
            return None
        if which == "x":
            x[sel] = u
        else:
            y[sel] = u
    return MovingMesh(mesh.grid, x, y, mesh.t)


def move_boundary_points(
    mesh: MovingMesh, mon: MonitorField, params: MeshingParams, dt: float, max_retries: int = 10
) -> MovingMesh:
    """Slide edge nodes along their edges toward arc-length equidistribution
    of the tangential monitor component; corners never move.

    Each edge solves a tridiagonal backward-Euler system with coefficients
    frozen at the step start.  A step that breaks node ordering, slides a
    node more than half of its smallest gap, or folds a near-edge cell is
    retried with a halved step.
    """
    for attempt in range(max_retries + 1):
        candidate = _move_edges_once(mesh, mon, params, dt * 0.5**attempt)
        if candidate is not None and _flow_valid(candidate):
            return candidate
    raise MeshFoldedError(-1, -1, float("nan"), "boundary adaptation")


# ---------------------------------------------------------------------------
# Driver-facing mesh advancement


def advance_mesh(
    mesh: MovingMesh, mon: MonitorField, params: MeshingParams, dt: float
) -> MovingMesh:
    """One mesh step: boundary adaptation first, then the interior flow."""
    sub = dt / params.mesh_substeps
    out = mesh
    for _ in range(params.mesh_substeps):
        out = move_boundary_points(out, mon, params, sub)
        out = mmpde_step(out, mon, params, sub)
    return out


def _inject(field: np.ndarray, r: int) -> np.ndarray:
    return field[::r, ::r]


def two_level_cycle(
    coarse: MovingMesh,
    E_fine: np.ndarray,
    factor: int,
    params: MeshingParams,
    dt: float,
) -> tuple[MovingMesh, MovingMesh]:
    """Move the coarse mesh using the fine solution, then refine.

    The Hessian is recovered on the fine mesh and restricted to coarse nodes
    by injection (they coincide by construction of the uniform refinement).
    With factor 1 this reduces to the one-level update.
    """
    r = int(factor)
    fine = refine_uniform(coarse, r) if r > 1 else coarse
    if E_fine.shape != fine.grid.shape:
        raise ValueError(
            f"fine solution shape {E_fine.shape} does not match refined grid {fine.grid.shape}"
        )
    H = recover_hessian(E_fine, fine)
    A = absolute_hessian(H)
    A_c = HessianField(_inject(A.h11, r), _inject(A.h12, r), _inject(A.h22, r))
    alpha = compute_alpha(A_c, coarse)
    mon = smooth_monitor(monitor_function(A_c, alpha), params.smoothing_sweeps)
    new_coarse = advance_mesh(coarse, mon, params, dt)
    new_fine = refine_uniform(new_coarse, r) if r > 1 else new_coarse
    return new_coarse, new_fine
