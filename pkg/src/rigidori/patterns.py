"""Constructors for standard creased papers and reference fixtures.

These builders return validated patterns (or ready-made constraint systems)
for the geometries used throughout the tests and the CLI examples: the
one-diagonal square, the four-quadrant cross vertex, sheared quad grids,
panel strips, fans, rings with holes, a two-vertex forest, and a locked
two-vertex system whose shared crease angle is pinned at pi/2 from both
sides.
"""

from __future__ import annotations

import math

import numpy as np

from .constraints import ConstraintSystem, system_from_loops, vertex_loop
from .model import TWO_PI, Crease, CreasePattern, validate_pattern
from .singlevertex import solve_degree3


def plain_square() -> CreasePattern:
    """Single square panel, boundary creases only."""
    verts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    creases = [Crease(0, 1, "outer"), Crease(1, 2, "outer"),
               Crease(2, 3, "outer"), Crease(3, 0, "outer")]
    return validate_pattern(CreasePattern(verts, creases, [[0, 1, 2, 3]]))


def square_diagonal() -> CreasePattern:
    """Unit square split by one diagonal: 2 panels, 1 inner crease."""
    verts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    creases = [
        Crease(0, 1, "outer"), Crease(1, 2, "outer"),
        Crease(2, 3, "outer"), Crease(3, 0, "outer"),
        Crease(0, 2, "inner"),
    ]
    panels = [[0, 1, 2], [0, 2, 3]]
    return validate_pattern(CreasePattern(verts, creases, panels))


def cross_vertex() -> CreasePattern:
    """Degree-4 vertex with four right-angle sectors (configuration 'cross')."""
    verts = [(0, 0),                          # 0 center
             (1, 0), (0, 1), (-1, 0), (0, -1),  # 1-4 side midpoints
             (1, 1), (-1, 1), (-1, -1), (1, -1)]  # 5-8 corners
    creases = [
        Crease(0, 1, "inner"), Crease(0, 2, "inner"),
        Crease(0, 3, "inner"), Crease(0, 4, "inner"),
        Crease(1, 5, "outer"), Crease(5, 2, "outer"),
        Crease(2, 6, "outer"), Crease(6, 3, "outer"),
        Crease(3, 7, "outer"), Crease(7, 4, "outer"),
        Crease(4, 8, "outer"), Crease(8, 1, "outer"),
    ]
    panels = [[0, 1, 5, 2], [0, 2, 6, 3], [0, 3, 7, 4], [0, 4, 8, 1]]
    return validate_pattern(CreasePattern(verts, creases, panels))


def cross_with_free_crease() -> CreasePattern:
    """Cross vertex with one extra boundary-to-boundary crease (in no loop)."""
    pat = cross_vertex()
    verts = [tuple(v) for v in pat.vertices]
    creases = list(pat.creases) + [Crease(1, 2, "inner")]
    panels = [[0, 1, 2], [1, 5, 2], [0, 2, 6, 3], [0, 3, 7, 4], [0, 4, 8, 1]]
    return validate_pattern(CreasePattern(verts, creases, panels))


def star_vertex(alphas, radius: float = 1.0) -> CreasePattern:
    """Single-vertex pattern with the given sector angles.

    Developable inputs (sum 2*pi) get an honest flat embedding; any other sum
    produces a cone with combinatorial coordinates and overridden angles.
    """
    alphas = np.asarray(alphas, dtype=float)
    n = len(alphas)
    total = float(np.sum(alphas))
    developable = abs(total - TWO_PI) <= 1e-12
    # crease j sits at the cumulative angle of alphas[1..j]
    true_angles = np.concatenate([[0.0], np.cumsum(alphas[1:])])
    if developable:
        angles = true_angles
    else:
        angles = true_angles * (TWO_PI / total)  # combinatorial placement only
    verts = [(0.0, 0.0)] + [(radius * math.cos(a), radius * math.sin(a))
                            for a in angles]
    creases = [Crease(0, j + 1, "inner") for j in range(n)]
    creases += [Crease(j + 1, (j + 1) % n + 1, "outer") for j in range(n)]
    panels = [[0, j + 1, (j + 1) % n + 1] for j in range(n)]
    if developable:
        return validate_pattern(CreasePattern(verts, creases, panels))
    # the stored override must align with the atan2-sorted crease fan, which
    # is a cyclic rotation of construction order; alphas[c] is the sector
    # entered at crease c, so realign by fan position
    bare = CreasePattern(verts, creases, panels)
    fan = bare.vertex_creases[0]
    override = {0: [float(alphas[c]) for c in fan]}
    return validate_pattern(
        CreasePattern(verts, creases, panels, alpha_override=override))


def single_vertex_cone(alphas, radius: float = 1.0) -> CreasePattern:
    return star_vertex(alphas, radius)


def sheared_grid(nx: int, ny: int, shear: float = 0.3, jitter: float = 0.0,
                 seed: int = 0) -> CreasePattern:
    """nx-by-ny quad-panel grid; odd rows offset by ``shear`` (Miura-like).

    All inner vertices have degree 4 and the embedding stays developable, so
    the flat state has j - 2i degrees of freedom.
    """
    rng = np.random.default_rng(seed)

    def vid(i, j):
        return j * (nx + 1) + i

    verts = []
    for j in range(ny + 1):
        for i in range(nx + 1):
            x = i + shear * (j % 2)
            y = float(j)
            if jitter and 0 < i < nx and 0 < j < ny:
                x += rng.uniform(-jitter, jitter)
                y += rng.uniform(-jitter, jitter)
            verts.append((x, y))
    creases = []
    for j in range(ny + 1):
        for i in range(nx):
            kind = "outer" if j in (0, ny) else "inner"
            creases.append(Crease(vid(i, j), vid(i + 1, j), kind))
    for j in range(ny):
        for i in range(nx + 1):
            kind = "outer" if i in (0, nx) else "inner"
            creases.append(Crease(vid(i, j), vid(i, j + 1), kind))
    panels = []
    for j in range(ny):
        for i in range(nx):
            panels.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)])
    return validate_pattern(CreasePattern(verts, creases, panels))


def miura_3x3() -> CreasePattern:
    return sheared_grid(3, 3, shear=0.4)


def three_squares() -> CreasePattern:
    """Strip of three unit squares hinged along two parallel creases."""
    verts = [(0, 0), (1, 0), (2, 0), (3, 0), (0, 1), (1, 1), (2, 1), (3, 1)]
    creases = [
        Crease(0, 1, "outer"), Crease(1, 2, "outer"), Crease(2, 3, "outer"),
        Crease(3, 7, "outer"), Crease(7, 6, "outer"), Crease(6, 5, "outer"),
        Crease(5, 4, "outer"), Crease(4, 0, "outer"),
        Crease(1, 5, "inner"), Crease(2, 6, "inner"),
    ]
    panels = [[0, 1, 5, 4], [1, 2, 6, 5], [2, 3, 7, 6]]
    return validate_pattern(CreasePattern(verts, creases, panels, base_panel=1))


def hexagon_fan() -> CreasePattern:
    """Six triangular panels around a central vertex (disk, Euler char 1)."""
    verts = [(0.0, 0.0)]
    for k in range(6):
        a = k * math.pi / 3
        verts.append((math.cos(a), math.sin(a)))
    creases = [Crease(0, k + 1, "inner") for k in range(6)]
    creases += [Crease(k + 1, (k + 1) % 6 + 1, "outer") for k in range(6)]
    panels = [[0, k + 1, (k + 1) % 6 + 1] for k in range(6)]
    return validate_pattern(CreasePattern(verts, creases, panels))


def pentagon_ring(twist: float = 0.3, inner_radius: float = 1.0,
                  outer_radius: float = 2.5) -> CreasePattern:
    """Ring of five panels around a pentagonal hole (degree-5 single hole).

    ``twist`` rotates the hole so the five connecting creases are not
    concurrent; pass 0 to make them concurrent (the loop then degenerates to
    a vertex-style rotation loop about the center).
    """
    verts = []
    for k in range(5):
        a = k * TWO_PI / 5
        verts.append((outer_radius * math.cos(a), outer_radius * math.sin(a)))
    for k in range(5):
        a = k * TWO_PI / 5 + twist
        verts.append((inner_radius * math.cos(a), inner_radius * math.sin(a)))
    creases = [Crease(k, (k + 1) % 5, "outer") for k in range(5)]
    creases += [Crease(5 + k, 5 + (k + 1) % 5, "outer") for k in range(5)]
    creases += [Crease(k, 5 + k, "inner") for k in range(5)]
    panels = [[k, (k + 1) % 5, 5 + (k + 1) % 5, 5 + k] for k in range(5)]
    holes = [[5, 6, 7, 8, 9]]
    return validate_pattern(CreasePattern(verts, creases, panels, holes=holes))


def square_ring() -> CreasePattern:
    """Eight panels around a square hole, two creases per hole corner.

    Exercises hole loops whose boundary vertices carry several inner
    creases each (the crossing order within a corner fan matters).
    """
    verts = [(0, 0), (3, 0), (3, 3), (0, 3),           # outer corners
             (1.5, 0), (3, 1.5), (1.5, 3), (0, 1.5),   # edge midpoints
             (1, 1), (2, 1), (2, 2), (1, 2)]           # hole corners
    creases = []
    ring = [0, 4, 1, 5, 2, 6, 3, 7]
    for a, b in zip(ring, ring[1:] + ring[:1]):
        creases.append(Crease(a, b, "outer"))
    for a, b in [(8, 9), (9, 10), (10, 11), (11, 8)]:
        creases.append(Crease(a, b, "outer"))
    for a, b in [(8, 0), (9, 1), (10, 2), (11, 3),
                 (8, 4), (9, 5), (10, 6), (11, 7)]:
        creases.append(Crease(a, b, "inner"))
    panels = [
        [0, 4, 8], [4, 1, 9, 8], [1, 5, 9], [5, 2, 10, 9],
        [2, 6, 10], [6, 3, 11, 10], [3, 7, 11], [7, 0, 8, 11],
    ]
    return validate_pattern(
        CreasePattern(verts, creases, panels, holes=[[8, 9, 10, 11]]))


def forest_two_vertices() -> CreasePattern:
    """Two flexible degree-4 vertices sharing one crease (interior is a tree)."""
    verts = [(0, 0), (2, 0),                       # the two inner vertices
             (-2, 2), (-3, 0), (-2, -2),           # left spokes
             (4, 2), (5, 0), (4, -2)]              # right spokes
    creases = [
        Crease(0, 1, "inner"),
        Crease(0, 2, "inner"), Crease(0, 3, "inner"), Crease(0, 4, "inner"),
        Crease(1, 5, "inner"), Crease(1, 6, "inner"), Crease(1, 7, "inner"),
        Crease(2, 3, "outer"), Crease(3, 4, "outer"),
        Crease(4, 7, "outer"), Crease(7, 6, "outer"),
        Crease(6, 5, "outer"), Crease(5, 2, "outer"),
    ]
    panels = [
        [0, 1, 5, 2],    # top (shared)
        [0, 4, 7, 1],    # bottom (shared)
        [0, 2, 3],       # left upper
        [0, 3, 4],       # left lower
        [1, 6, 5],       # right upper
        [1, 7, 6],       # right lower
    ]
    return validate_pattern(CreasePattern(verts, creases, panels))


def locked_two_vertex_system() -> tuple[ConstraintSystem, np.ndarray]:
    """Two flexible vertices whose shared angle is pinned at pi/2 from both sides.

    Vertex 1 is a spherical four-bar whose shared-crease angle cannot exceed
    pi/2; vertex 2 cannot fall below pi/2.  A developable degree-2 relay
    vertex w adds a second connection v1-w-v2 so the loop-sharing structure
    has a cycle, while its two creases are forced flat and leave the
    kinematics of the four-bars untouched.  Returns the system and the
    (exactly solvable) locked state.

    Variables: 0 shared crease, 1-3 vertex-1 spokes, 4 v1-w, 5 w-v2,
    6-8 vertex-2 spokes.
    """
    d1 = math.acos(-0.25)
    d2 = math.acos(0.25)
    a1 = [4 * math.pi / 3, math.pi / 3, 1.0, d1 - 1.0]   # vertex 1 four-bar
    a2 = [math.pi / 3, math.pi / 3, 0.7, d2 - 0.7]       # vertex 2 four-bar

    loops = [
        vertex_loop([a1[0], a1[1], a1[2] / 2, a1[2] / 2, a1[3]],
                    [0, 1, 4, 2, 3], label="vertex 1"),
        vertex_loop([a2[0], a2[1], a2[2] / 2, a2[2] / 2, a2[3]],
                    [0, 6, 5, 7, 8], label="vertex 2"),
        vertex_loop([math.pi / 2, 3 * math.pi / 2], [4, 5], label="relay w"),
    ]
    system = system_from_loops(loops, n_vars=9)

    # the locked state: each four-bar at its dead point (straight elbow),
    # which reduces it to the spherical triangle solved in closed form
    tri1 = solve_degree3([a1[0], a1[1], a1[2] + a1[3]])
    tri2 = solve_degree3([a2[0], a2[1], a2[2] + a2[3]])
    p1 = next(p for p in tri1.points if p[0] > 0)
    p2 = next(p for p in tri2.points if p[0] > 0)
    if not (abs(p1[0] - math.pi / 2) < 1e-12 and abs(p2[0] - math.pi / 2) < 1e-12):
        raise AssertionError("lock fixture angles drifted from pi/2")
    rho = np.zeros(9)
    rho[0] = math.pi / 2
    rho[1], rho[3] = p1[1], p1[2]
    rho[6], rho[8] = p2[1], p2[2]
    return system, rho
