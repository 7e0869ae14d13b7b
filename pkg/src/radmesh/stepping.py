"""Implicit time integration: two-stage SDIRK with predictor-corrector
coefficient freezing, the positivity cutoff, and step scheduling.

A step integrates du/dt = L(t) u + g(t) where boundary rows of the operator
are algebraic constraints enforced at every stage.  The tableau is stiffly
accurate, so the second stage state is the step result and satisfies the
boundary closure at t_{n+1} exactly.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import linalg
from .grid import MeshMotion
from .operators import CoupledOperator, build_coupled_operator
from .physics import BoundarySpec, MaterialMap, PhysicsParams, StateFields

__all__ = [
    "SdirkTableau",
    "CutoffEvent",
    "CutoffPolicy",
    "StepSchedule",
    "cutoff_threshold",
    "apply_cutoff",
    "sdirk2_step",
    "predictor_corrector_step",
]


@dataclass(frozen=True)
class SdirkTableau:
    """Two-stage singly diagonally implicit Runge-Kutta tableau."""

    gamma: float
    a: tuple[tuple[float, float], tuple[float, float]]
    b: tuple[float, float]
    c: tuple[float, float]

    @classmethod
    def default(cls) -> "SdirkTableau":
        """L-stable, stiffly accurate, order-2 tableau with gamma = 1 - sqrt(2)/2."""
        g = 1.0 - np.sqrt(2.0) / 2.0
        return cls(gamma=g, a=((g, 0.0), (1.0 - g, g)), b=(1.0 - g, g), c=(g, 1.0))

    def __post_init__(self):
        if not (
            np.isclose(self.a[1][0], self.b[0]) and np.isclose(self.a[1][1], self.b[1])
        ):
            raise ValueError("tableau must be stiffly accurate (last stage row == weights)")


def cutoff_threshold(M: int, N: int) -> float:
    """Positivity floor 30/((M-1)(N-1)) for an MxN mesh."""
    if M < 2 or N < 2:
        raise ValueError("threshold needs at least a 2x2 mesh")
    return 30.0 / ((M - 1) * (N - 1))


@dataclass(frozen=True)
class CutoffEvent:
    step: int
    time: float
    field: str
    count: int


@dataclass
class CutoffPolicy:
    """Positivity floor plus a log of every clipping event."""

    threshold: float
    events: list[CutoffEvent] = field(default_factory=list)

    @classmethod
    def for_grid(cls, M: int, N: int) -> "CutoffPolicy":
        return cls(threshold=cutoff_threshold(M, N))

    def events_at_step(self, step: int) -> list[CutoffEvent]:
        return [e for e in self.events if e.step == step]


def apply_cutoff(state: StateFields, policy: CutoffPolicy, step: int = -1) -> StateFields:
    """Replace every E, T value below the threshold by the threshold.

    Clipping events (per field, with node counts) are appended to the policy
    log; the input state is not modified.
    """
    thr = policy.threshold
    out = state.copy()
    for name in ("E", "T"):
        arr = getattr(out, name)
        low = arr < thr
        count = int(np.count_nonzero(low))
        if count:
            np.maximum(arr, thr, out=arr)
            policy.events.append(CutoffEvent(step, state.t, name, count))
    return out


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes totaling t_end: optional geometric start-up ramp, then a
    constant dt, with the final step shortened to land on t_end exactly."""

    t_end: float
    dt: float
    dt_init: float = 1e-5
    ramp_steps: int = 20
    ramp: bool = True

    def __post_init__(self):
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")

    def steps(self) -> list[float]:
        out: list[float] = []
        t = 0.0
        k = 0
        if self.ramp and self.ramp_steps > 1 and self.dt_init < self.dt:
            rho = (self.dt / self.dt_init) ** (1.0 / (self.ramp_steps - 1))
        else:
            rho = 1.0
        while t < self.t_end - 1e-14 * max(1.0, self.t_end):
            if self.ramp and k < self.ramp_steps and rho > 1.0:
                dt_k = self.dt_init * rho**k
            else:
                dt_k = self.dt
            if t + dt_k > self.t_end:
                dt_k = self.t_end - t
            out.append(dt_k)
            t += dt_k
            k += 1
        return out


def _stage_solve(op: CoupledOperator, u_known: np.ndarray, gdt: float, fact=None, cache=None, slot=None):
    """Solve one stage: (I - gdt L) U = u_known + gdt g on PDE rows,
    (L U) = g on boundary rows.  Returns (U, factorization)."""
    bmask = op.boundary_mask
    scale = np.where(bmask, 1.0, -gdt)
    mat = sp.diags(scale) @ op.matrix + sp.diags((~bmask).astype(float))
    rhs = np.where(bmask, op.rhs, u_known + gdt * op.rhs)
    if fact is not None:
        return linalg.solve(fact, rhs), fact
    if cache is not None:
        return cache.solve(slot, mat.tocsc(), rhs), None
    fact = linalg.factorize(mat.tocsc())
    return linalg.solve(fact, rhs), fact


def sdirk2_step(
    family,
    u_n: np.ndarray,
    t_n: float,
    dt: float,
    tableau: SdirkTableau | None = None,
    timers: dict | None = None,
    reuse_operator: bool = False,
    solver_cache=None,
    slot: str = "step",
):
    """One step of the two-stage SDIRK scheme on the operator family.

    family(t) must return a CoupledOperator at the stage time.  With
    reuse_operator the family is assembled once and its factorization shared
    between stages (valid when L and g do not depend on t within the step).
    A FactorizationCache makes consecutive steps reuse factorizations of
    slowly drifting stage matrices.
    """
    tab = tableau or SdirkTableau.default()
    g = tab.gamma
    gdt = g * dt
    t1 = t_n + tab.c[0] * dt
    t2 = t_n + tab.c[1] * dt

    def timed_assemble(t):
        tic = _time.perf_counter()
        op = family(t)
        if timers is not None:
            timers["assembly"] = timers.get("assembly", 0.0) + _time.perf_counter() - tic
        return op

    def timed_solve(op, known, fact=None, stage="s1"):
        tic = _time.perf_counter()
        # gdt is part of the key: a changed step size rebuilds the stage
        # matrix wholesale, so reusing across it never pays off
        key = (slot, "s" if reuse_operator else stage, gdt)
        u, f = _stage_solve(op, known, gdt, fact, solver_cache, key)
        if timers is not None:
            timers["solve"] = timers.get("solve", 0.0) + _time.perf_counter() - tic
        return u, f

    op1 = timed_assemble(t1)
    u1, fact = timed_solve(op1, u_n, stage="s1")
    k1 = (u1 - u_n) / gdt
    known2 = u_n + dt * tab.a[1][0] * k1
    if reuse_operator:
        u2, _ = timed_solve(op1, known2, fact, stage="s")
    else:
        op2 = timed_assemble(t2)
        u2, _ = timed_solve(op2, known2, stage="s2")
    # stiffly accurate: the second stage state is u_{n+1}
    return u2


def predictor_corrector_step(
    E_n: np.ndarray,
    T_n: np.ndarray,
    motion: MeshMotion,
    z_map: MaterialMap,
    bc: BoundarySpec,
    dt: float,
    policy: CutoffPolicy,
    params: PhysicsParams = PhysicsParams(),
    tableau: SdirkTableau | None = None,
    extra_source=None,
    step: int = -1,
    timers: dict | None = None,
    solver_cache=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance (E, T) over one step by the coefficient-freezing scheme.

    The predictor freezes the diffusion coefficients, opacity, and boundary
    closures at (E_n, T_n) and integrates the linearized system (lagged
    diffusion).  The corrector repeats the step from (E_n, T_n) with the
    frozen quantities re-evaluated, at each stage time, on the linear-in-time
    reconstruction between (E_n, T_n) and the predictor result at t_{n+1};
    the final stage therefore freezes exactly at the predictor result.  The
    stage-consistent re-freeze is what makes the pair second order: freezing
    at any single state leaves an O(dt) coefficient error in the stage
    systems (most visibly in the opacity of the radiative boundary rows) and
    drops the pair to first order.  The positivity cutoff is applied to the
    predictor result and to the final state.
    """
    t_n = motion.t_n
    shape = E_n.shape
    nf = E_n.size
    u_n = np.concatenate([E_n.ravel(), T_n.ravel()])
    static = motion.is_static

    def run_pass(star_at, reuse, slot):
        def family(t):
            E_star, T_star = star_at(t)
            return build_coupled_operator(
                E_star, T_star, motion, z_map, bc, t, params, extra_source
            )

        u = sdirk2_step(
            family, u_n, t_n, dt, tableau, timers,
            reuse_operator=reuse, solver_cache=solver_cache, slot=slot,
        )
        return u[:nf].reshape(shape), u[nf:].reshape(shape)

    E_p, T_p = run_pass(lambda t: (E_n, T_n), reuse=static, slot="pred")
    pred = apply_cutoff(StateFields(E_p, T_p, t_n + dt), policy, step)

    def corrector_star(t):
        th = np.clip((t - t_n) / dt, 0.0, 1.0)
        return (1.0 - th) * E_n + th * pred.E, (1.0 - th) * T_n + th * pred.T

    E_c, T_c = run_pass(corrector_star, reuse=False, slot="corr")
    final = apply_cutoff(StateFields(E_c, T_c, t_n + dt), policy, step)
    return final.E, final.T
