"""Semi-discrete operators for the coupled (E, T) system on a moving mesh.

The transformed equations are discretized on the reference grid with central
differences: conservative fluxes of the frozen diffusion tensors at cell-edge
midpoints, central mesh-motion convection, and the exchange source linearized
about the frozen state (sigma_a at T*, T^4 as (T*)^3 T).  Interior nodes carry
PDE rows of d(E,T)/dt = L u + g; boundary nodes carry algebraic rows that the
time integrator enforces stage-wise.

Unknown ordering: all E values (C order over the grid), then all T values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import (
    MeshMotion,
    MetricTerms,
    MovingMesh,
    compute_metrics,
    diff_eta,
    diff_xi,
    mesh_at_time,
)
from .linalg import write_matrix_market
from .physics import (
    BoundarySpec,
    MaterialMap,
    PhysicsParams,
    atomic_number_at,
    material_conduction_coeff,
    opacity,
    radiation_diffusion_coeff,
)

__all__ = [
    "FrozenCoefficients",
    "CoupledOperator",
    "gradient_magnitude",
    "freeze_coefficients",
    "assemble_diffusion",
    "assemble_convection",
    "assemble_coupling",
    "apply_boundary_conditions",
    "build_coupled_operator",
    "dump_operator",
]


def gradient_magnitude(E: np.ndarray, metrics: MetricTerms) -> np.ndarray:
    """Physical-space |grad E| from reference-grid derivatives.

    grad E = (1/J) (y_eta E_xi - y_xi E_eta, -x_eta E_xi + x_xi E_eta).
    """
    M, N = E.shape
    dxi, deta = 1.0 / (M - 1), 1.0 / (N - 1)
    e_xi = diff_xi(E, dxi)
    e_eta = diff_eta(E, deta)
    gx = (metrics.y_eta * e_xi - metrics.y_xi * e_eta) / metrics.jac
    gy = (-metrics.x_eta * e_xi + metrics.x_xi * e_eta) / metrics.jac
    return np.hypot(gx, gy)


@dataclass(frozen=True)
class FrozenCoefficients:
    """Diffusion tensors and opacity frozen at a predictor state (E*, T*).

    se11/se12/se22 are D_r * A and st11/st12/st22 are D_t * A at the nodes;
    sigma_star is the frozen opacity.  All tensors are SPD wherever the mesh
    is valid and the starred state is above the cutoff.
    """

    E_star: np.ndarray
    T_star: np.ndarray
    sigma_star: np.ndarray
    se11: np.ndarray
    se12: np.ndarray
    se22: np.ndarray
    st11: np.ndarray
    st12: np.ndarray
    st22: np.ndarray


def freeze_coefficients(
    E_star: np.ndarray,
    T_star: np.ndarray,
    z: np.ndarray,
    metrics: MetricTerms,
    params: PhysicsParams = PhysicsParams(),
) -> FrozenCoefficients:
    """Evaluate D_r, D_t, sigma_a at the starred state and form D*A tensors."""
    sigma = opacity(T_star, z)
    grad = gradient_magnitude(E_star, metrics)
    d_r = radiation_diffusion_coeff(E_star, grad, sigma)
    d_t = material_conduction_coeff(T_star, params.kappa)
    fro = FrozenCoefficients(
        E_star,
        T_star,
        sigma,
        d_r * metrics.a11,
        d_r * metrics.a12,
        d_r * metrics.a22,
        d_t * metrics.a11,
        d_t * metrics.a12,
        d_t * metrics.a22,
    )
    det_e = fro.se11 * fro.se22 - fro.se12**2
    det_t = fro.st11 * fro.st22 - fro.st12**2
    if np.any(fro.se11 <= 0) or np.any(det_e <= 0) or np.any(fro.st11 <= 0) or np.any(det_t <= 0):
        raise ValueError("frozen diffusion tensor not SPD; starred state below cutoff?")
    return fro


def _half_xi(f: np.ndarray) -> np.ndarray:
    """Arithmetic mean onto xi-edge midpoints, shape (M-1, N)."""
    return 0.5 * (f[:-1, :] + f[1:, :])


def _half_eta(f: np.ndarray) -> np.ndarray:
    """Arithmetic mean onto eta-edge midpoints, shape (M, N-1)."""
    return 0.5 * (f[:, :-1] + f[:, 1:])


def _diffusion_weights(
    s11: np.ndarray, s12: np.ndarray, s22: np.ndarray, jac: np.ndarray, dxi: float, deta: float
) -> dict[tuple[int, int], np.ndarray]:
    """Nine-point interior weights of (1/J) div(S grad u) in flux form."""
    s11h = _half_xi(s11)
    s12hx = _half_xi(s12)
    s22h = _half_eta(s22)
    s12he = _half_eta(s12)

    e11 = s11h[1:, 1:-1]
    w11 = s11h[:-1, 1:-1]
    e12 = s12hx[1:, 1:-1]
    w12 = s12hx[:-1, 1:-1]
    n22 = s22h[1:-1, 1:]
    s22_ = s22h[1:-1, :-1]
    n12 = s12he[1:-1, 1:]
    s12_ = s12he[1:-1, :-1]

    cx = 1.0 / dxi**2
    cy = 1.0 / deta**2
    cc = 1.0 / (4.0 * dxi * deta)
    inv_j = 1.0 / jac[1:-1, 1:-1]

    w = {
        (1, 0): (e11 * cx + (n12 - s12_) * cc) * inv_j,
        (-1, 0): (w11 * cx - (n12 - s12_) * cc) * inv_j,
        (0, 1): (n22 * cy + (e12 - w12) * cc) * inv_j,
        (0, -1): (s22_ * cy - (e12 - w12) * cc) * inv_j,
        (1, 1): (e12 + n12) * cc * inv_j,
        (-1, -1): (w12 + s12_) * cc * inv_j,
        (1, -1): -(e12 + s12_) * cc * inv_j,
        (-1, 1): -(w12 + n12) * cc * inv_j,
    }
    # the row sum of a conservative stencil is zero; building the diagonal as
    # the negative sum keeps constants annihilated to the last bit
    w[(0, 0)] = -sum(w.values())
    return w


def _convection_weights(
    metrics: MetricTerms, dxi: float, deta: float
) -> dict[tuple[int, int], np.ndarray]:
    """Central-difference weights of +b . grad_hat u at interior nodes."""
    b1 = metrics.b1[1:-1, 1:-1]
    b2 = metrics.b2[1:-1, 1:-1]
    return {
        (1, 0): b1 / (2.0 * dxi),
        (-1, 0): -b1 / (2.0 * dxi),
        (0, 1): b2 / (2.0 * deta),
        (0, -1): -b2 / (2.0 * deta),
    }


def _accumulate(target: dict, extra: dict) -> None:
    for off, w in extra.items():
        if off in target:
            target[off] = target[off] + w
        else:
            target[off] = w


def _stencil_coo(weights: dict, idx: np.ndarray, row_offset: int, col_offset: int):
    """COO triplets for interior-node stencil weights."""
    M, N = idx.shape
    rows, cols, vals = [], [], []
    base = idx[1:-1, 1:-1].ravel()
    for (dm, dn), w in weights.items():
        rows.append(base + row_offset)
        cols.append(idx[1 + dm : M - 1 + dm, 1 + dn : N - 1 + dn].ravel() + col_offset)
        vals.append(np.asarray(w, dtype=float).ravel())
    return rows, cols, vals


def assemble_diffusion(
    frozen_tensor: tuple[np.ndarray, np.ndarray, np.ndarray],
    metrics: MetricTerms,
) -> sp.csr_matrix:
    """Single-field interior diffusion operator (1/J) div(S grad u).

    Boundary rows are left zero; they are replaced by boundary closures.
    """
    s11, s12, s22 = frozen_tensor
    M, N = s11.shape
    dxi, deta = 1.0 / (M - 1), 1.0 / (N - 1)
    idx = np.arange(M * N).reshape(M, N)
    w = _diffusion_weights(s11, s12, s22, metrics.jac, dxi, deta)
    rows, cols, vals = _stencil_coo(w, idx, 0, 0)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(M * N, M * N),
    )
    return mat.tocsr()


def assemble_convection(metrics: MetricTerms) -> sp.csr_matrix:
    """Single-field interior convection operator +b . grad_hat u."""
    M, N = metrics.jac.shape
    dxi, deta = 1.0 / (M - 1), 1.0 / (N - 1)
    idx = np.arange(M * N).reshape(M, N)
    w = _convection_weights(metrics, dxi, deta)
    rows, cols, vals = _stencil_coo(w, idx, 0, 0)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(M * N, M * N),
    )
    return mat.tocsr()


def assemble_coupling(
    T_star: np.ndarray, z: np.ndarray, metrics: MetricTerms
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Linearized exchange-source coefficients at interior nodes.

    Returns (dE/dE, dE/dT, dT/dE, dT/dT) diagonal weights: the E row gains
    J*sigma*((T*)^3 T - E), the T row its exact negative.
    """
    sigma = opacity(T_star, z)
    w = (metrics.jac * sigma)[1:-1, 1:-1]
    t3 = (T_star**3)[1:-1, 1:-1]
    return -w, w * t3, w, -w * t3


def _tangential_entries(k: int, K: int, dtan: float):
    """Stencil of the along-edge derivative at edge node k of K nodes."""
    c = 1.0 / (2.0 * dtan)
    if k == 0:
        return ((0, -3.0 * c), (1, 4.0 * c), (2, -1.0 * c))
    if k == K - 1:
        return ((K - 1, 3.0 * c), (K - 2, -4.0 * c), (K - 3, 1.0 * c))
    return ((k - 1, -c), (k + 1, c))


@dataclass
class CoupledOperator:
    """Assembled coupled system: du/dt = matrix u + rhs on PDE rows,
    matrix u = rhs on boundary rows."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    boundary_mask: np.ndarray
    jac: np.ndarray
    shape: tuple[int, int]


def apply_boundary_conditions(
    op: CoupledOperator,
    bc: BoundarySpec,
    mesh: MovingMesh,
    metrics: MetricTerms,
    T_star: np.ndarray,
    z: np.ndarray,
) -> CoupledOperator:
    """Replace boundary rows of an interior-assembled operator with the
    transformed closures of the given boundary kind.

    Rows on the x-edges carry the radiative inflow/outflow relations (or
    plain zero-normal-derivative rows for the insulated kind); y-edge rows
    are always zero-normal-derivative.  Existing entries in boundary rows
    are discarded; PDE rows pass through untouched.
    """
    M, N = op.shape
    nfield = M * N
    keep = sp.diags((~op.boundary_mask).astype(float))
    interior_only = (keep @ op.matrix).tocoo()
    br, bcols, bvals, bri, brv = _boundary_rows(bc, mesh, metrics, T_star, z)
    rows = np.concatenate([interior_only.row, np.asarray(br, dtype=np.int64)])
    cols = np.concatenate([interior_only.col, np.asarray(bcols, dtype=np.int64)])
    vals = np.concatenate([interior_only.data, np.asarray(bvals, dtype=float)])
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(2 * nfield, 2 * nfield)).tocsr()
    matrix.eliminate_zeros()
    rhs = np.where(op.boundary_mask, 0.0, op.rhs)
    rhs[np.asarray(bri, dtype=np.int64)] = np.asarray(brv, dtype=float)
    return CoupledOperator(matrix, rhs, op.boundary_mask, op.jac, op.shape)


def _boundary_rows(
    bc: BoundarySpec,
    mesh: MovingMesh,
    metrics: MetricTerms,
    T_star: np.ndarray,
    z: np.ndarray,
):
    """COO entries and rhs values for all boundary rows of both fields.

    xi-edges own their corner nodes; eta-edge rows cover m = 1..M-2 only.
    """
    M, N = mesh.grid.shape
    dxi, deta = mesh.grid.dxi, mesh.grid.deta
    idx = np.arange(M * N).reshape(M, N)
    nfield = M * N
    rows, cols, vals = [], [], []
    rhs_idx, rhs_val = [], []
    sigma = opacity(T_star, z)

    data = bc.neumann_data or {}

    def emit(row, entries, value):
        for col, wgt in entries:
            rows.append(row)
            cols.append(col)
            vals.append(wgt)
        rhs_idx.append(row)
        rhs_val.append(value)

    def xi_edge_derivative_entries(m_edge, n):
        """(entries of u_xi, entries of u_eta) at xi-edge node (m_edge, n)."""
        c = 1.0 / (2.0 * dxi)
        if m_edge == 0:
            d_xi = ((idx[0, n], -3.0 * c), (idx[1, n], 4.0 * c), (idx[2, n], -1.0 * c))
        else:
            d_xi = (
                (idx[M - 1, n], 3.0 * c),
                (idx[M - 2, n], -4.0 * c),
                (idx[M - 3, n], 1.0 * c),
            )
        d_eta = tuple((idx[m_edge, k], wgt) for k, wgt in _tangential_entries(n, N, deta))
        return d_xi, d_eta

    def eta_edge_derivative_entries(m, n_edge):
        c = 1.0 / (2.0 * deta)
        if n_edge == 0:
            d_eta = ((idx[m, 0], -3.0 * c), (idx[m, 1], 4.0 * c), (idx[m, 2], -1.0 * c))
        else:
            d_eta = (
                (idx[m, N - 1], 3.0 * c),
                (idx[m, N - 2], -4.0 * c),
                (idx[m, N - 3], 1.0 * c),
            )
        d_xi = tuple((idx[k, n_edge], wgt) for k, wgt in _tangential_entries(m, M, dxi))
        return d_xi, d_eta

    # xi-edges (x = 0 and x = 1), all n including corners
    for m_edge in (0, M - 1):
        for n in range(N):
            d_xi, d_eta = xi_edge_derivative_entries(m_edge, n)
            c1 = 1.0 / metrics.x_xi[m_edge, n]
            c2 = -metrics.y_xi[m_edge, n] / (metrics.x_xi[m_edge, n] * metrics.y_eta[m_edge, n])
            ddx = tuple((col, c1 * wgt) for col, wgt in d_xi) + tuple(
                (col, c2 * wgt) for col, wgt in d_eta
            )
            if bc.kind == "marshak":
                # E: 1/4 E -/+ (1/(6 sigma)) dE/dx = {1, 0}; T: dT/dx = 0
                sgn = -1.0 if m_edge == 0 else 1.0
                coef = sgn / (6.0 * sigma[m_edge, n])
                entries = ((idx[m_edge, n], 0.25),) + tuple(
                    (col, coef * wgt) for col, wgt in ddx
                )
                emit(idx[m_edge, n], entries, 1.0 if m_edge == 0 else 0.0)
                emit(
                    idx[m_edge, n] + nfield,
                    tuple((col + nfield, wgt) for col, wgt in ddx),
                    0.0,
                )
            else:
                xb, yb = mesh.x[m_edge, n], mesh.y[m_edge, n]
                g_e = data["E_x"](xb, yb) if "E_x" in data else 0.0
                g_t = data["T_x"](xb, yb) if "T_x" in data else 0.0
                emit(idx[m_edge, n], ddx, g_e)
                emit(
                    idx[m_edge, n] + nfield,
                    tuple((col + nfield, wgt) for col, wgt in ddx),
                    g_t,
                )

    # eta-edges (y = 0 and y = 1), m = 1..M-2: dU/dy = 0 (or supplied data)
    for n_edge in (0, N - 1):
        for m in range(1, M - 1):
            d_xi, d_eta = eta_edge_derivative_entries(m, n_edge)
            c3 = -metrics.x_eta[m, n_edge] / (
                metrics.x_xi[m, n_edge] * metrics.y_eta[m, n_edge]
            )
            c4 = 1.0 / metrics.y_eta[m, n_edge]
            ddy = tuple((col, c3 * wgt) for col, wgt in d_xi) + tuple(
                (col, c4 * wgt) for col, wgt in d_eta
            )
            xb, yb = mesh.x[m, n_edge], mesh.y[m, n_edge]
            g_e = data["E_y"](xb, yb) if (bc.kind == "insulated" and "E_y" in data) else 0.0
            g_t = data["T_y"](xb, yb) if (bc.kind == "insulated" and "T_y" in data) else 0.0
            emit(idx[m, n_edge], ddy, g_e)
            emit(
                idx[m, n_edge] + nfield,
                tuple((col + nfield, wgt) for col, wgt in ddy),
                g_t,
            )

    return rows, cols, vals, rhs_idx, rhs_val


def build_coupled_operator(
    E_star: np.ndarray,
    T_star: np.ndarray,
    motion: MeshMotion,
    z_map: MaterialMap,
    bc: BoundarySpec,
    t_stage: float,
    params: PhysicsParams = PhysicsParams(),
    extra_source=None,
) -> CoupledOperator:
    """Assemble L(t_stage) and g(t_stage) for the frozen state (E*, T*).

    extra_source, if given, is a callable (x, y) -> (s_E, s_T) of physical
    source densities added to the PDE right-hand sides with the same Jacobian
    weighting as the exchange source (used by manufactured-solution runs).
    """
    mesh = mesh_at_time(motion, t_stage)
    metrics = compute_metrics(mesh, motion.velocity())
    z = atomic_number_at(mesh.x, mesh.y, z_map)
    z = np.broadcast_to(np.asarray(z, dtype=float), mesh.x.shape)
    frozen = freeze_coefficients(E_star, T_star, z, metrics, params)

    M, N = mesh.grid.shape
    nfield = M * N
    dxi, deta = mesh.grid.dxi, mesh.grid.deta
    idx = np.arange(nfield).reshape(M, N)

    conv = _convection_weights(metrics, dxi, deta)
    w_e = _diffusion_weights(frozen.se11, frozen.se12, frozen.se22, metrics.jac, dxi, deta)
    _accumulate(w_e, conv)
    w_t = _diffusion_weights(frozen.st11, frozen.st12, frozen.st22, metrics.jac, dxi, deta)
    _accumulate(w_t, conv)

    rows, cols, vals = _stencil_coo(w_e, idx, 0, 0)
    r2, c2, v2 = _stencil_coo(w_t, idx, nfield, nfield)
    rows += r2
    cols += c2
    vals += v2

    cee, cet, cte, ctt = assemble_coupling(T_star, z, metrics)
    interior = idx[1:-1, 1:-1].ravel()
    for blk_r, blk_c, w in (
        (0, 0, cee),
        (0, nfield, cet),
        (nfield, 0, cte),
        (nfield, nfield, ctt),
    ):
        rows.append(interior + blk_r)
        cols.append(interior + blk_c)
        vals.append(np.asarray(w, dtype=float).ravel())

    br, bcols, bvals, bri, brv = _boundary_rows(bc, mesh, metrics, T_star, z)

    all_rows = np.concatenate(rows + [np.asarray(br, dtype=np.int64)])
    all_cols = np.concatenate(cols + [np.asarray(bcols, dtype=np.int64)])
    all_vals = np.concatenate(vals + [np.asarray(bvals, dtype=float)])
    matrix = sp.coo_matrix((all_vals, (all_rows, all_cols)), shape=(2 * nfield, 2 * nfield)).tocsr()

    rhs = np.zeros(2 * nfield)
    rhs[np.asarray(bri, dtype=np.int64)] = np.asarray(brv, dtype=float)
    if extra_source is not None:
        s_e, s_t = extra_source(mesh.x, mesh.y)
        src_e = (metrics.jac * s_e)[1:-1, 1:-1].ravel()
        src_t = (metrics.jac * s_t)[1:-1, 1:-1].ravel()
        rhs[interior] += src_e
        rhs[interior + nfield] += src_t

    bmask = np.zeros(2 * nfield, dtype=bool)
    edge = np.zeros((M, N), dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    bmask[: nfield] = edge.ravel()
    bmask[nfield:] = edge.ravel()

    return CoupledOperator(matrix, rhs, bmask, metrics.jac, (M, N))


def dump_operator(op: CoupledOperator, path) -> None:
    """Debug dump of the assembled operator in Matrix Market format."""
    write_matrix_market(path, op.matrix)
