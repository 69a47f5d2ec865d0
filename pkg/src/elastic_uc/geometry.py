"""Named experiment geometries on the unit square.

Every geometry lists the breakpoint coordinates its regions require; the
initial mesh subdivides long stretches between required breakpoints to a
target spacing so the coarse mesh is reasonably uniform while staying
fitted to all region boundaries and coefficient interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mesh import Rectangle, RegionSpec, build_fitted_mesh, refine_uniform, tag_regions


@dataclass(frozen=True, eq=False)
class Geometry:
    name: str
    regions: dict
    required_x: tuple
    required_y: tuple


def convex_geometry():
    """Data region wrapping the target from three sides (left, right, bottom)."""
    omega = RegionSpec((Rectangle(0.1, 0.25, 0.9, 1.0),), complement=True)
    target = RegionSpec((Rectangle(0.1, 0.95, 0.9, 1.0),), complement=True)
    return Geometry(
        "convex",
        {"omega": omega, "B": target},
        (0.0, 0.1, 0.9, 1.0),
        (0.0, 0.25, 0.95, 1.0),
    )


def split_geometry(xi=0.6):
    """Shrunk data region; target split into a convex-hull half and the rest."""
    omega = RegionSpec(
        (
            Rectangle(0.0, 0.0, 0.1, xi),
            Rectangle(0.9, 0.0, 1.0, xi),
            Rectangle(0.1, 0.0, 0.9, 0.25),
        )
    )
    b_minus = Rectangle(0.0, 0.0, 1.0, xi)
    b_plus = Rectangle(0.1, xi, 0.9, 0.95)
    return Geometry(
        "split",
        {
            "omega": omega,
            "B": RegionSpec((b_minus, b_plus)),
            "B_minus": RegionSpec((b_minus,)),
            "B_plus": RegionSpec((b_plus,)),
            "Omega_minus": RegionSpec((Rectangle(0.0, 0.0, 1.0, xi),)),
            "Omega_plus": RegionSpec((Rectangle(0.0, xi, 1.0, 1.0),)),
        },
        (0.0, 0.1, 0.9, 1.0),
        (0.0, 0.25, xi, 0.95, 1.0),
    )


def inclusion_geometry():
    """Data only at the bottom; target rectangle away from the data."""
    rect = Rectangle(0.25, 0.25, 0.75, 0.9)
    b_minus = Rectangle(0.25, 0.25, 0.75, 0.6)
    b_plus = Rectangle(0.25, 0.6, 0.75, 0.9)
    return Geometry(
        "inclusion",
        {
            "omega": RegionSpec((Rectangle(0.0, 0.0, 1.0, 0.25),)),
            "B": RegionSpec((rect,)),
            "B_minus": RegionSpec((b_minus,)),
            "B_plus": RegionSpec((b_plus,)),
        },
        (0.0, 0.25, 0.75, 1.0),
        (0.0, 0.25, 0.6, 0.9, 1.0),
    )


GEOMETRIES = {
    "convex": convex_geometry,
    "split": split_geometry,
    "inclusion": inclusion_geometry,
}


def make_geometry(name, xi=0.6):
    if name not in GEOMETRIES:
        raise ValueError(f"unknown geometry {name!r}")
    return split_geometry(xi) if name == "split" else GEOMETRIES[name]()


def refine_breakpoints(required, max_spacing):
    """Insert equispaced points so no gap exceeds `max_spacing`."""
    out = [required[0]]
    for a, b in zip(required, required[1:]):
        n = max(1, math.ceil((b - a) / max_spacing - 1e-12))
        for i in range(1, n):
            out.append(a + i * (b - a) / n)
        out.append(b)
    return tuple(out)


def initial_mesh(geometry, max_spacing=0.25):
    bx = refine_breakpoints(geometry.required_x, max_spacing)
    by = refine_breakpoints(geometry.required_y, max_spacing)
    return tag_regions(build_fitted_mesh(bx, by), geometry.regions)


_MESH_CACHE: dict = {}


def mesh_at_level(geometry, level, max_spacing=0.25):
    """Level-`level` refinement of the geometry's initial mesh (cached)."""
    key = (geometry.name, geometry.required_x, geometry.required_y, max_spacing)
    chain = _MESH_CACHE.setdefault(key, [])
    if not chain:
        chain.append(initial_mesh(geometry, max_spacing))
    while len(chain) <= level:
        chain.append(refine_uniform(chain[-1]))
    return chain[level]
