"""Loop-closure constraint system over the folding angles.

Each inner vertex contributes one rotation loop (3 independent scalars),
each hole with non-concurrent incident creases one rigid-motion loop
(3 rotation + 3 translation scalars).  A loop is the post-multiplied
product of per-crease factors

    [in-plane rotation beta_k, translation (a_k, b_k)] . [x-axis rotation rho_k]

and the constraint is that the product equals the identity.

The residual vector extracts the skew part of the rotation block (plus the
translation column for holes); these are the three/six independent scalars
whose derivatives carry the tangent-space information.  Because the skew
part also vanishes for half-turn rotations, the reported per-loop max-norm
always includes the full matrix deviation from the identity, so spurious
roots are never accepted as solved states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import TWO_PI, CreasePattern

RESIDUAL_TOL = 1e-9


def rot_x4(rho: float) -> np.ndarray:
    c, s = math.cos(rho), math.sin(rho)
    return np.array([[1.0, 0, 0, 0],
                     [0, c, -s, 0],
                     [0, s, c, 0],
                     [0, 0, 0, 1.0]])


def hinge4(beta: float, a: float = 0.0, b: float = 0.0) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, -s, 0, a],
                     [s, c, 0, b],
                     [0, 0, 1.0, 0],
                     [0, 0, 0, 1.0]])


# d/drho of rot_x4(rho) equals SX4 @ rot_x4(rho)
SX4 = np.zeros((4, 4))
SX4[1, 2] = -1.0
SX4[2, 1] = 1.0


@dataclass
class Loop:
    """One closure loop: crossing order, in-plane geometry, variable indices."""

    kind: str                    # "vertex" or "hole"
    vars: list[int]              # variable index of each crossed crease
    betas: np.ndarray            # in-plane rotation before each crossing
    offsets: np.ndarray          # (n, 2) frame-origin offsets; zero at a vertex
    label: str = ""

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=float)
        if self.offsets is None:
            self.offsets = np.zeros((len(self.vars), 2))
        self.offsets = np.asarray(self.offsets, dtype=float)

    @property
    def rows(self) -> int:
        return 6 if self.kind == "hole" else 3

    def transform(self, rho: np.ndarray) -> np.ndarray:
        T = np.eye(4)
        for k, v in enumerate(self.vars):
            T = T @ hinge4(self.betas[k], *self.offsets[k]) @ rot_x4(rho[v])
        return T

    def extract(self, T: np.ndarray) -> np.ndarray:
        r = [(T[2, 1] - T[1, 2]) / 2.0,
             (T[0, 2] - T[2, 0]) / 2.0,
             (T[1, 0] - T[0, 1]) / 2.0]
        if self.kind == "hole":
            r += [T[0, 3], T[1, 3], T[2, 3]]
        return np.array(r)

    def max_deviation(self, T: np.ndarray) -> float:
        """Full elementwise deviation from the identity (spurious-root guard)."""
        if self.kind == "hole":
            return float(np.abs(T - np.eye(4)).max())
        return float(np.abs(T[:3, :3] - np.eye(3)).max())

    def jacobian(self, rho: np.ndarray) -> np.ndarray:
        """Rows x len(vars) derivative of the extracted residual."""
        n = len(self.vars)
        factors = [hinge4(self.betas[k], *self.offsets[k]) @ rot_x4(rho[self.vars[k]])
                   for k in range(n)]
        prefix = [np.eye(4)]
        for F in factors:
            prefix.append(prefix[-1] @ F)
        suffix = [np.eye(4)]
        for F in reversed(factors):
            suffix.append(F @ suffix[-1])
        suffix.reverse()
        J = np.zeros((self.rows, n))
        for k in range(n):
            G = hinge4(self.betas[k], *self.offsets[k])
            D = prefix[k] @ G @ SX4 @ rot_x4(rho[self.vars[k]]) @ suffix[k + 1]
            J[:, k] = self.extract(D)
        return J


@dataclass
class Residual:
    vector: np.ndarray
    per_loop: list[dict]
    max_norm: float

    def satisfied(self, tol: float = RESIDUAL_TOL) -> bool:
        return self.max_norm <= tol


@dataclass
class ConstraintSystem:
    n_vars: int
    loops: list[Loop]
    free_vars: list[int] = field(default_factory=list)

    def __post_init__(self):
        offsets = []
        pos = 0
        for lp in self.loops:
            offsets.append(pos)
            pos += lp.rows
        self.row_offsets = offsets
        self.residual_dim = pos
        in_loop = set()
        for lp in self.loops:
            in_loop.update(lp.vars)
        self.free_vars = sorted(set(range(self.n_vars)) - in_loop)

    @property
    def n_vertex_loops(self) -> int:
        return sum(1 for lp in self.loops if lp.kind == "vertex")

    @property
    def n_hole_loops(self) -> int:
        return sum(1 for lp in self.loops if lp.kind == "hole")


def residual(system: ConstraintSystem, rho) -> Residual:
    rho = np.asarray(rho, dtype=float)
    vec = np.zeros(system.residual_dim)
    per_loop = []
    worst = 0.0
    for lp, off in zip(system.loops, system.row_offsets):
        T = lp.transform(rho)
        vec[off:off + lp.rows] = lp.extract(T)
        dev = lp.max_deviation(T)
        worst = max(worst, dev)
        per_loop.append({"kind": lp.kind, "label": lp.label, "max_dev": dev})
    return Residual(vec, per_loop, worst)


def build_system(pattern: CreasePattern) -> ConstraintSystem:
    """Assemble one loop per inner vertex and per hole of the pattern.

    Loop crease order follows the counter-clockwise path convention of the
    reference embedding and starts at the lowest-indexed crease.  Holes whose
    incident creases are concurrent are converted to vertex-style rotation
    loops about the concurrence point.
    """
    loops = []
    for v in pattern.inner_vertices:
        fan = pattern.vertex_creases[v]
        alphas = pattern.sector_angles(v)
        r = min(range(len(fan)), key=lambda j: fan[j])
        order = [fan[(r + j) % len(fan)] for j in range(len(fan))]
        betas = [alphas[(r + j) % len(fan)] for j in range(len(fan))]
        loops.append(Loop(
            kind="vertex",
            vars=[pattern.var_of_crease[ci] for ci in order],
            betas=np.asarray(betas),
            offsets=np.zeros((len(order), 2)),
            label=f"vertex {v}",
        ))
    for h, cycle in enumerate(pattern.holes):
        loops.append(_hole_loop(pattern, h, cycle))
    return ConstraintSystem(n_vars=pattern.n_vars, loops=loops)


def _hole_loop(pattern: CreasePattern, hole_index: int, cycle: list[int]) -> Loop:
    # orient the cycle so the hole lies on the left of travel
    oriented = list(cycle)
    a, b = oriented[0], oriented[1]
    if (a, b) in pattern._panel_of_directed:
        # a panel claims this directed edge, so material is on the left: flip
        oriented = oriented[::-1]
    m = len(oriented)

    crossings = []  # (crease_index, origin vertex, outward angle)
    for j, v in enumerate(oriented):
        prev_v = oriented[j - 1]
        next_v = oriented[(j + 1) % m]
        ang_in = pattern._ray_angle(v, pattern.crease_index(v, prev_v))
        fan = pattern.vertex_creases[v]
        boundary = {pattern.crease_index(v, prev_v), pattern.crease_index(v, next_v)}
        inner = [(((pattern._ray_angle(v, ci) - ang_in) % TWO_PI), ci)
                 for ci in fan if ci not in boundary and
                 pattern.creases[ci].kind == "inner"]
        inner.sort()
        for rel, ci in inner:
            crossings.append((ci, v, ang_in + rel))

    if not crossings:
        raise ValueError(f"hole {hole_index} has no incident inner creases")

    # start at the lowest-indexed crease for determinism
    r = min(range(len(crossings)), key=lambda j: crossings[j][0])
    crossings = crossings[r:] + crossings[:r]

    n = len(crossings)
    betas = np.zeros(n)
    offsets = np.zeros((n, 2))
    for j in range(n):
        ci, v, theta = crossings[j]
        cj, vp, theta_p = crossings[j - 1]
        betas[j] = theta - theta_p
        d = pattern.vertices[v] - pattern.vertices[vp]
        c, s = math.cos(-theta_p), math.sin(-theta_p)
        offsets[j] = (c * d[0] - s * d[1], s * d[0] + c * d[1])

    vars_ = [pattern.var_of_crease[ci] for ci, _, _ in crossings]

    if _creases_concurrent(pattern, [ci for ci, _, _ in crossings]):
        return Loop(kind="vertex", vars=vars_, betas=betas,
                    offsets=np.zeros((n, 2)), label=f"hole {hole_index} (concurrent)")
    return Loop(kind="hole", vars=vars_, betas=betas, offsets=offsets,
                label=f"hole {hole_index}")


def _creases_concurrent(pattern: CreasePattern, crease_ids: list[int],
                        tol: float = 1e-9) -> bool:
    """Do the supporting lines of these creases share a common point?"""
    if len(crease_ids) < 2:
        return True
    A = []
    rhs = []
    for ci in crease_ids:
        c = pattern.creases[ci]
        p = pattern.vertices[c.u]
        d = pattern.vertices[c.v] - pattern.vertices[c.u]
        nrm = np.hypot(d[0], d[1])
        nvec = np.array([-d[1], d[0]]) / nrm
        A.append(nvec)
        rhs.append(float(nvec @ p))
    A = np.asarray(A)
    rhs = np.asarray(rhs)
    q, res, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return float(np.abs(A @ q - rhs).max()) <= tol


def system_from_loops(loops: list[Loop], n_vars: int) -> ConstraintSystem:
    """Assemble a system directly from loops (cone inputs, test fixtures)."""
    return ConstraintSystem(n_vars=n_vars, loops=loops)


def vertex_loop(alphas, var_indices, label="") -> Loop:
    """Rotation loop for an abstract single vertex given its sector angles."""
    alphas = np.asarray(alphas, dtype=float)
    return Loop(kind="vertex", vars=list(var_indices), betas=alphas,
                offsets=np.zeros((len(alphas), 2)), label=label)


def is_flat_state(rho, tol: float = 1e-9) -> bool:
    """Every folding angle at +-pi (a flat folded state distinct from 0)."""
    rho = np.asarray(rho, dtype=float)
    if rho.size == 0:
        return False
    return bool(np.all(np.abs(np.abs(rho) - math.pi) <= tol))


def is_trivial_space(samples, tol: float = 1e-6) -> bool:
    """Sampled solution set equal to {0} or to a single +-rho pair."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        return True
    if np.all(np.abs(samples) <= tol):
        return True
    reps: list[np.ndarray] = []
    for s in samples:
        for r in reps:
            if np.abs(s - r).max() <= tol or np.abs(s + r).max() <= tol:
                break
        else:
            reps.append(s)
    if len(reps) != 1:
        return False
    return bool(np.abs(reps[0]).max() > tol)
