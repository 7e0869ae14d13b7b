import numpy as np
import pytest
import sympy as sy

from radmesh import (
    BoundarySpec,
    MaterialMap,
    MovingMesh,
    ReferenceGrid,
    build_coupled_operator,
    compute_metrics,
    gradient_magnitude,
    uniform_mesh,
)
from radmesh.grid import static_motion, trapezoid_weights
from radmesh.operators import (
    assemble_convection,
    assemble_coupling,
    assemble_diffusion,
    dump_operator,
    freeze_coefficients,
)
from radmesh.physics import PhysicsParams, opacity

from conftest import perturbed_mesh


# ---------------------------------------------------------------------------
# independent brute-force assemblies (explicit loops, straight from the flux
# definitions; deliberately no vectorization shared with the implementation)


def dense_diffusion_oracle(s11, s12, s22, jac, M, N):
    dxi, deta = 1.0 / (M - 1), 1.0 / (N - 1)
    A = np.zeros((M * N, M * N))
    for q in range(M * N):
        U = np.zeros(M * N)
        U[q] = 1.0
        U = U.reshape(M, N)
        fx = np.zeros((M - 1, N))
        for i in range(M - 1):
            for n in range(1, N - 1):
                s11h = 0.5 * (s11[i, n] + s11[i + 1, n])
                s12h = 0.5 * (s12[i, n] + s12[i + 1, n])
                du_eta = (U[i, n + 1] - U[i, n - 1] + U[i + 1, n + 1] - U[i + 1, n - 1]) / (
                    4 * deta
                )
                fx[i, n] = s11h * (U[i + 1, n] - U[i, n]) / dxi + s12h * du_eta
        fy = np.zeros((M, N - 1))
        for m in range(1, M - 1):
            for j in range(N - 1):
                s22h = 0.5 * (s22[m, j] + s22[m, j + 1])
                s12h = 0.5 * (s12[m, j] + s12[m, j + 1])
                du_xi = (U[m + 1, j] - U[m - 1, j] + U[m + 1, j + 1] - U[m - 1, j + 1]) / (
                    4 * dxi
                )
                fy[m, j] = s22h * (U[m, j + 1] - U[m, j]) / deta + s12h * du_xi
        for m in range(1, M - 1):
            for n in range(1, N - 1):
                div = (fx[m, n] - fx[m - 1, n]) / dxi + (fy[m, n] - fy[m, n - 1]) / deta
                A[m * N + n, q] = div / jac[m, n]
    return A


def dense_convection_oracle(b1, b2, M, N):
    dxi, deta = 1.0 / (M - 1), 1.0 / (N - 1)
    A = np.zeros((M * N, M * N))
    for m in range(1, M - 1):
        for n in range(1, N - 1):
            row = m * N + n
            A[row, (m + 1) * N + n] += b1[m, n] / (2 * dxi)
            A[row, (m - 1) * N + n] -= b1[m, n] / (2 * dxi)
            A[row, m * N + n + 1] += b2[m, n] / (2 * deta)
            A[row, m * N + n - 1] -= b2[m, n] / (2 * deta)
    return A


def frozen_state(mesh, seed=0):
    E = 1.0 + 0.5 * np.sin(np.pi * mesh.x) * np.sin(np.pi * mesh.y)
    T = E**0.25
    return E, T


class TestGradientMagnitude:
    def test_linear_field(self):
        mesh = uniform_mesh(ReferenceGrid(11, 11))
        g = gradient_magnitude(mesh.x, compute_metrics(mesh))
        assert np.allclose(g[1:-1, 1:-1], 1.0, atol=1e-13)

    def test_constant_field(self):
        mesh = perturbed_mesh(9, 9, seed=1)
        g = gradient_magnitude(np.full(mesh.grid.shape, 3.0), compute_metrics(mesh))
        assert np.allclose(g, 0.0, atol=1e-12)

    def test_chain_rule_oracle(self):
        # E = sin(pi x) on the map x = xi + 0.1 xi eta: grad E = (pi cos(pi x), 0)
        errs = {}
        for n in (21, 41):
            g = ReferenceGrid(n, n)
            xi, eta = g.xi_eta()
            x = xi + 0.1 * xi * eta
            mesh = MovingMesh(g, x, eta.copy())
            E = np.sin(np.pi * x)
            got = gradient_magnitude(E, compute_metrics(mesh))
            expected = np.abs(np.pi * np.cos(np.pi * x))
            errs[n] = np.abs(got - expected).max()
        assert errs[21] / errs[41] > 3.5
        assert errs[41] < 1e-2


class TestDiffusionAssembly:
    def test_identity_mesh_laplacian(self):
        mesh = uniform_mesh(ReferenceGrid(7, 7))
        met = compute_metrics(mesh)
        D = 0.7
        s = (D * met.a11, D * met.a12, D * met.a22)
        A = assemble_diffusion(s, met).toarray()
        h2 = (1 / 6) ** 2
        row = A[3 * 7 + 3]
        assert row[3 * 7 + 3] == pytest.approx(-4 * D / h2, rel=1e-13)
        for col in (2 * 7 + 3, 4 * 7 + 3, 3 * 7 + 2, 3 * 7 + 4):
            assert row[col] == pytest.approx(D / h2, rel=1e-13)
        assert row[2 * 7 + 2] == 0.0  # no cross terms on the identity mesh

    def test_annihilates_constants(self):
        mesh = perturbed_mesh(9, 9, seed=7)
        met = compute_metrics(mesh)
        E, T = frozen_state(mesh)
        z = np.ones(mesh.grid.shape)
        fro = freeze_coefficients(E, T, z, met)
        A = assemble_diffusion((fro.se11, fro.se12, fro.se22), met)
        r = A @ np.ones(A.shape[0])
        assert np.abs(r).max() < 1e-13

    def test_symmetry_identity_mesh(self):
        mesh = uniform_mesh(ReferenceGrid(9, 9))
        met = compute_metrics(mesh)
        s = (2.0 * met.a11, 2.0 * met.a12, 2.0 * met.a22)
        A = assemble_diffusion(s, met).toarray()
        interior = np.zeros((9, 9), dtype=bool)
        interior[1:-1, 1:-1] = True
        sub = A[np.ix_(interior.ravel(), interior.ravel())]
        assert np.abs(sub - sub.T).max() < 1e-12  # symmetric up to boundary rows

    def test_matches_dense_oracle(self):
        mesh = perturbed_mesh(7, 7, seed=13)
        met = compute_metrics(mesh)
        E, T = frozen_state(mesh)
        z = np.ones(mesh.grid.shape)
        fro = freeze_coefficients(E, T, z, met)
        got = assemble_diffusion((fro.se11, fro.se12, fro.se22), met).toarray()
        want = dense_diffusion_oracle(fro.se11, fro.se12, fro.se22, met.jac, 7, 7)
        assert np.abs(got - want).max() < 1e-12 * max(1.0, np.abs(want).max())


class TestConvectionAssembly:
    def test_zero_velocity(self):
        met = compute_metrics(perturbed_mesh(7, 7, seed=3))
        assert assemble_convection(met).nnz == 0 or np.abs(assemble_convection(met).data).max() == 0

    def test_uniform_velocity_linear_field(self):
        mesh = uniform_mesh(ReferenceGrid(9, 9))
        vel = (np.ones(mesh.grid.shape), np.zeros(mesh.grid.shape))
        met = compute_metrics(mesh, vel)
        A = assemble_convection(met)
        u = mesh.x.ravel()  # u = xi on the identity mesh
        r = (A @ u).reshape(9, 9)
        assert np.allclose(r[1:-1, 1:-1], 1.0, atol=1e-13)

    def test_matches_dense_oracle(self):
        mesh = perturbed_mesh(7, 7, seed=17)
        rng = np.random.default_rng(8)
        vel = (rng.standard_normal(mesh.grid.shape), rng.standard_normal(mesh.grid.shape))
        met = compute_metrics(mesh, vel)
        got = assemble_convection(met).toarray()
        want = dense_convection_oracle(met.b1, met.b2, 7, 7)
        assert np.abs(got - want).max() < 1e-13 * max(1.0, np.abs(want).max())


class TestCoupling:
    def test_equilibrium_residual_zero(self):
        mesh = uniform_mesh(ReferenceGrid(5, 5))
        met = compute_metrics(mesh)
        T = np.full(mesh.grid.shape, 1.3)
        E = T**4
        z = np.ones(mesh.grid.shape)
        cee, cet, cte, ctt = assemble_coupling(T, z, met)
        res = cee * E[1:-1, 1:-1] + cet * T[1:-1, 1:-1]
        assert np.abs(res).max() < 1e-14

    def test_unit_weights(self):
        mesh = uniform_mesh(ReferenceGrid(5, 5))
        met = compute_metrics(mesh)
        ones = np.ones(mesh.grid.shape)
        cee, cet, cte, ctt = assemble_coupling(ones, ones, met)
        assert np.allclose(cee, -1.0) and np.allclose(cet, 1.0)
        assert np.allclose(cte, 1.0) and np.allclose(ctt, -1.0)

    def test_linearization_consistent_at_star(self):
        mesh = perturbed_mesh(7, 7, seed=23)
        met = compute_metrics(mesh)
        rng = np.random.default_rng(4)
        T = 0.5 + rng.random(mesh.grid.shape)
        E = 0.5 + rng.random(mesh.grid.shape)
        z = 1.0 + 4.0 * rng.random(mesh.grid.shape)
        cee, cet, cte, ctt = assemble_coupling(T, z, met)
        res = cee * E[1:-1, 1:-1] + cet * T[1:-1, 1:-1]
        true = (met.jac * opacity(T, z) * (T**4 - E))[1:-1, 1:-1]
        assert np.abs(res - true).max() < 1e-13 * np.abs(true).max()


class TestBoundaryRows:
    def op_for(self, mesh, E, T, bc, z_map=None):
        motion = static_motion(mesh, 1e-3)
        return build_coupled_operator(
            E, T, motion, z_map or MaterialMap(()), bc, motion.t_n + 1e-3
        )

    def test_marshak_constant_field(self):
        mesh = uniform_mesh(ReferenceGrid(7, 7))
        E = np.full(mesh.grid.shape, 4.0)
        T = np.ones(mesh.grid.shape)
        op = self.op_for(mesh, E, T, BoundarySpec("marshak"))
        u = np.concatenate([E.ravel(), T.ravel()])
        res = (op.matrix @ u - op.rhs)[op.boundary_mask]
        # 1/4 * 4 - 0 = 1 on the inflow edge, 1 = 1 + 0 elsewhere: residual 0
        inflow_rows = np.arange(7)  # m=0 nodes, E block
        full = op.matrix @ u - op.rhs
        assert np.abs(full[inflow_rows]).max() < 1e-13

    def test_neumann_rows_constant_field(self):
        mesh = perturbed_mesh(7, 7, seed=29)
        E = np.full(mesh.grid.shape, 2.0)
        T = np.full(mesh.grid.shape, 2.0**0.25)
        op = self.op_for(mesh, E, T, BoundarySpec("insulated"))
        u = np.concatenate([E.ravel(), T.ravel()])
        res = (op.matrix @ u - op.rhs)[op.boundary_mask]
        assert np.abs(res).max() < 1e-12

    def test_eta_edge_row_oracle(self):
        # mesh skewed so x_eta != 0 on the eta edges
        g = ReferenceGrid(9, 9)
        xi, eta = g.xi_eta()
        x = xi + 0.05 * np.sin(np.pi * xi) * (eta + 0.2)
        y = eta + 0.05 * np.sin(np.pi * eta) * (xi + 0.1)
        mesh = MovingMesh(g, x, y)
        E = 1.0 + x + 2 * y + x * y
        T = np.ones(g.shape)
        op = self.op_for(mesh, E, T, BoundarySpec("insulated"))
        met = compute_metrics(mesh)
        u = np.concatenate([E.ravel(), T.ravel()])
        lhs = op.matrix @ u
        dxi, deta = g.dxi, g.deta
        m = 4
        # oracle: (-x_eta/(x_xi y_eta)) u_xi + (1/y_eta) u_eta, one-sided into
        # the domain at n=0, central along the edge
        u_xi = (E[m + 1, 0] - E[m - 1, 0]) / (2 * dxi)
        u_eta = (-3 * E[m, 0] + 4 * E[m, 1] - E[m, 2]) / (2 * deta)
        c3 = -met.x_eta[m, 0] / (met.x_xi[m, 0] * met.y_eta[m, 0])
        c4 = 1.0 / met.y_eta[m, 0]
        assert lhs[m * 9 + 0] == pytest.approx(c3 * u_xi + c4 * u_eta, rel=1e-12)

    def test_marshak_inflow_rhs_for_preset(self):
        mesh = uniform_mesh(ReferenceGrid(9, 9))
        from radmesh.physics import initial_state

        st = initial_state("example1", mesh)
        op = self.op_for(mesh, st.E, np.maximum(st.T, 0.1), BoundarySpec("marshak"),
                         MaterialMap(((1 / 3, 2 / 3, 1 / 3, 2 / 3, 5.0),)))
        rhs_grid = op.rhs[: 81].reshape(9, 9)
        assert np.allclose(rhs_grid[0, :], 1.0)
        assert np.allclose(rhs_grid[-1, :], 0.0)


class TestCoupledOperator:
    def test_equilibrium_steady(self):
        mesh = uniform_mesh(ReferenceGrid(9, 9))
        c = 2.0
        E = np.full(mesh.grid.shape, c)
        T = np.full(mesh.grid.shape, c**0.25)
        motion = static_motion(mesh, 1e-3)
        op = build_coupled_operator(E, T, motion, MaterialMap(()), BoundarySpec("insulated"), 1e-3)
        u = np.concatenate([E.ravel(), T.ravel()])
        res_pde = (op.matrix @ u + op.rhs)[~op.boundary_mask]
        res_bnd = (op.matrix @ u - op.rhs)[op.boundary_mask]
        assert np.abs(res_pde).max() < 1e-12
        assert np.abs(res_bnd).max() < 1e-12

    def test_dense_reference_5x5(self):
        # full operator against a from-scratch dense assembly on the identity
        # mesh: Cartesian Laplacians, no convection, diagonal coupling, and
        # one-sided boundary closures
        M = N = 5
        mesh = uniform_mesh(ReferenceGrid(M, N))
        rng = np.random.default_rng(31)
        E = 1.0 + 0.2 * rng.random((M, N))
        T = 1.0 + 0.2 * rng.random((M, N))
        motion = static_motion(mesh, 1e-3)
        op = build_coupled_operator(E, T, motion, MaterialMap(()), BoundarySpec("marshak"), 1e-3)
        got = op.matrix.toarray()

        met = compute_metrics(mesh)
        fro = freeze_coefficients(E, T, np.ones((M, N)), met)
        nf = M * N
        want = np.zeros((2 * nf, 2 * nf))
        want[:nf, :nf] = dense_diffusion_oracle(fro.se11, fro.se12, fro.se22, met.jac, M, N)
        want[nf:, nf:] = dense_diffusion_oracle(fro.st11, fro.st12, fro.st22, met.jac, M, N)
        sig = opacity(T, np.ones((M, N)))
        for m in range(1, M - 1):
            for n in range(1, N - 1):
                i = m * N + n
                w = met.jac[m, n] * sig[m, n]
                want[i, i] += -w
                want[i, nf + i] += w * T[m, n] ** 3
                want[nf + i, i] += w
                want[nf + i, nf + i] += -w * T[m, n] ** 3
        dxi = deta = 1.0 / (M - 1)
        want_rhs = np.zeros(2 * nf)
        for n in range(N):  # xi-edges own corners
            for m_edge, sgn, val in ((0, -1.0, 1.0), (M - 1, 1.0, 0.0)):
                i = m_edge * N + n
                coef = sgn / (6.0 * sig[m_edge, n])
                want[i, i] += 0.25
                s = 1.0 if m_edge == 0 else -1.0
                cols = (
                    (m_edge, -3.0 * s), (m_edge + int(s) * 1, 4.0 * s), (m_edge + int(s) * 2, -1.0 * s)
                )
                for mm, wgt in cols:
                    want[i, mm * N + n] += coef * wgt / (2 * dxi)
                    want[nf + i, nf + mm * N + n] += wgt / (2 * dxi)  # dT/dx = 0 row
                want_rhs[i] = val
        for n_edge in (0, N - 1):
            for m in range(1, M - 1):
                i = m * N + n_edge
                s = 1.0 if n_edge == 0 else -1.0
                for nn, wgt in ((n_edge, -3.0 * s), (n_edge + int(s), 4.0 * s), (n_edge + 2 * int(s), -1.0 * s)):
                    want[i, m * N + nn] += wgt / (2 * deta)
                    want[nf + i, nf + m * N + nn] += wgt / (2 * deta)
        assert np.abs(got - want).max() < 1e-11
        assert np.abs(op.rhs - want_rhs).max() < 1e-13

    def test_row_sparsity(self):
        mesh = perturbed_mesh(9, 9, seed=37)
        E, T = frozen_state(mesh)
        motion = static_motion(mesh, 1e-3)
        op = build_coupled_operator(E, T, motion, MaterialMap(()), BoundarySpec("marshak"), 1e-3)
        per_row = np.diff(op.matrix.tocsr().indptr)
        assert per_row.max() <= 18

    def test_conservative_interior_sum_for_flat_boundary_state(self):
        # J-weighted sum of all interior (E-row + T-row) rates vanishes when
        # the state is constant near the boundary: fluxes telescope to the
        # (zero) near-edge fluxes and the exchange terms cancel pairwise
        M = N = 21
        mesh = uniform_mesh(ReferenceGrid(M, N))
        r = np.hypot(mesh.x - 0.5, mesh.y - 0.5)
        bump = np.where(r < 0.3, (1 - (r / 0.3) ** 2) ** 4, 0.0)
        E = 1.0 + bump
        T = E**0.25
        motion = static_motion(mesh, 1e-3)
        op = build_coupled_operator(E, T, motion, MaterialMap(()), BoundarySpec("insulated"), 1e-3)
        u = np.concatenate([E.ravel(), T.ravel()])
        rate = op.matrix @ u + np.where(op.boundary_mask, 0.0, op.rhs)
        nf = M * N
        interior = ~op.boundary_mask[:nf]
        jw = op.jac.ravel()
        total = np.sum(jw[interior] * rate[:nf][interior]) + np.sum(
            jw[interior] * rate[nf:][interior]
        )
        scale = np.abs(jw[interior] * rate[:nf][interior]).max()
        assert abs(total) <= 1e-12 * max(scale, 1.0)

    def test_apply_boundary_conditions_matches_builder(self):
        from radmesh.operators import apply_boundary_conditions
        from radmesh.physics import atomic_number_at

        mesh = uniform_mesh(ReferenceGrid(9, 9))
        E = 1.0 + 0.3 * np.sin(np.pi * mesh.x) * np.sin(np.pi * mesh.y)
        T = E**0.25
        motion = static_motion(mesh, 1e-3)
        zmap = MaterialMap(((1 / 3, 2 / 3, 1 / 3, 2 / 3, 5.0),))
        op = build_coupled_operator(E, T, motion, zmap, BoundarySpec("marshak"), 1e-3)
        met = compute_metrics(mesh, motion.velocity())
        z = np.broadcast_to(
            np.asarray(atomic_number_at(mesh.x, mesh.y, zmap)), mesh.x.shape
        )
        redone = apply_boundary_conditions(op, BoundarySpec("marshak"), mesh, met, T, z)
        assert (op.matrix - redone.matrix).nnz == 0
        assert np.array_equal(op.rhs, redone.rhs)

    def test_dump_matrix_market(self, tmp_path):
        mesh = uniform_mesh(ReferenceGrid(5, 5))
        E = np.ones(mesh.grid.shape)
        T = np.ones(mesh.grid.shape)
        op = build_coupled_operator(E, T, static_motion(mesh, 1e-3), MaterialMap(()),
                                    BoundarySpec("insulated"), 1e-3)
        path = tmp_path / "op.mtx"
        dump_operator(op, path)
        assert path.read_text().startswith("%%MatrixMarket")
