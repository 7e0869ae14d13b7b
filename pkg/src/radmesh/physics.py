"""Two-temperature model coefficients, materials, and problem presets.

The model couples photon energy E and material temperature T through the
exchange source sigma_a*(T^4 - E), with flux-limited radiation diffusion and
Spitzer-Harm material conduction.  Everything is dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MaterialMap",
    "PhysicsParams",
    "StateFields",
    "BoundarySpec",
    "opacity",
    "radiation_diffusion_coeff",
    "material_conduction_coeff",
    "coupling_source",
    "atomic_number_at",
    "initial_state",
    "material_map_for_preset",
    "PRESET_NAMES",
]

PRESET_NAMES = ("example1", "example2", "example3")


@dataclass(frozen=True)
class MaterialMap:
    """Piecewise-constant atomic number: rectangles over a background.

    Rectangles are open: points exactly on a region edge get the background
    value.  Each region is (x0, x1, y0, y1, z).
    """

    regions: tuple[tuple[float, float, float, float, float], ...]
    background: float = 1.0

    def __post_init__(self):
        if self.background <= 0.0:
            raise ValueError("background atomic number must be positive")
        for x0, x1, y0, y1, z in self.regions:
            if not (x0 < x1 and y0 < y1):
                raise ValueError(f"degenerate region rectangle ({x0},{x1})x({y0},{y1})")
            if z <= 0.0:
                raise ValueError("region atomic number must be positive")


@dataclass(frozen=True)
class PhysicsParams:
    """Material conductivity entering D_t = kappa * T^(5/2)."""

    kappa: float = 0.01

    def __post_init__(self):
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")


@dataclass
class StateFields:
    """Nodal photon energy and material temperature at one time."""

    E: np.ndarray
    T: np.ndarray
    t: float = 0.0

    def copy(self) -> "StateFields":
        return StateFields(self.E.copy(), self.T.copy(), self.t)


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary-condition selection.

    kind "marshak": radiative inflow on x=0 and outflow on x=1 for E,
    zero normal derivative for T on x-edges and for both fields on y-edges.
    kind "insulated": zero normal derivative for both fields on all edges.

    neumann_data optionally supplies inhomogeneous normal-derivative values
    for manufactured-solution runs: a dict with keys among
    ("E_x", "E_y", "T_x", "T_y") mapping to callables f(x, y).  It applies to
    the insulated kind only.
    """

    kind: str = "marshak"
    neumann_data: dict | None = None

    def __post_init__(self):
        if self.kind not in ("marshak", "insulated"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")


def opacity(T, z):
    """Absorption opacity z^3 / T^3."""
    T = np.asarray(T, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(T <= 0.0):
        raise ValueError("opacity needs T > 0; apply the positivity cutoff first")
    if np.any(z <= 0.0):
        raise ValueError("atomic number must be positive")
    return z**3 / T**3


def radiation_diffusion_coeff(E, grad_norm, sigma_a):
    """Flux-limited radiation diffusion coefficient 1/(3*sigma_a + |grad E|/E)."""
    E = np.asarray(E, dtype=float)
    if np.any(E <= 0.0):
        raise ValueError("radiation diffusion coefficient needs E > 0")
    return 1.0 / (3.0 * np.asarray(sigma_a, dtype=float) + np.asarray(grad_norm, dtype=float) / E)


def material_conduction_coeff(T, kappa: float = 0.01):
    """Spitzer-Harm conduction coefficient kappa * T^(5/2)."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0.0):
        raise ValueError("conduction coefficient needs T > 0")
    return kappa * T**2.5


def coupling_source(E, T, z):
    """Exchange source pair (s_E, s_T) with s_T = -s_E exactly."""
    s_e = opacity(T, z) * (np.asarray(T, dtype=float) ** 4 - np.asarray(E, dtype=float))
    return s_e, -s_e


def atomic_number_at(x, y, mat: MaterialMap):
    """Atomic number sampled at physical points (open-rectangle membership)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.full(np.broadcast(x, y).shape, mat.background, dtype=float)
    for x0, x1, y0, y1, zval in mat.regions:
        inside = (x > x0) & (x < x1) & (y > y0) & (y < y1)
        z = np.where(inside, zval, z)
    if z.ndim == 0:
        return float(z)
    return z


def material_map_for_preset(name: str) -> MaterialMap:
    if name == "example1":
        return MaterialMap((((1 / 3), (2 / 3), (1 / 3), (2 / 3), 5.0),))
    if name == "example2":
        return MaterialMap((((1 / 3), (2 / 3), (1 / 3), (2 / 3), 10.0),))
    if name == "example3":
        return MaterialMap(
            (
                (3 / 16, 7 / 16, 9 / 16, 13 / 16, 10.0),
                (9 / 16, 13 / 16, 3 / 16, 7 / 16, 10.0),
            )
        )
    raise ValueError(f"unknown preset {name!r}")


def initial_state(preset: str, mesh) -> StateFields:
    """Initial (E, T) sampled at the mesh nodes; T starts in equilibrium E^(1/4).

    Presets 1 and 2 use the tanh layer driven from x=0; preset 3 uses a hot
    Gaussian spot at the origin over a cold floor.
    """
    x, y = mesh.x, mesh.y
    if preset in ("example1", "example2"):
        E = (1.0 - np.tanh(10.0 * x)) * (1.0 - 1e-5) + 1e-5
    elif preset == "example3":
        E = 0.001 + 100.0 * np.exp(-100.0 * (x**2 + y**2))
    else:
        raise ValueError(f"unknown preset {preset!r}")
    return StateFields(E, E**0.25, t=0.0)
