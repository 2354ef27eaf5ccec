"""Tangent-space rigidity analysis: Jacobian, DOF, flexes, self-stresses."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraints import (RESIDUAL_TOL, ConstraintSystem, build_system, residual)
from .errors import NotAFlex, NotDevelopable, NotOnVariety
from .kinematics import TransferChain, build_spanning_tree
from .model import TWO_PI, CreasePattern

RANK_REL_TOL = 1e-8


def jacobian(system: ConstraintSystem, rho) -> np.ndarray:
    """Analytic derivative of the stacked loop residuals, shape (3i+6h) x j.

    Columns of creases appearing in no loop are identically zero; such
    creases fold freely.
    """
    rho = np.asarray(rho, dtype=float)
    J = np.zeros((system.residual_dim, system.n_vars))
    for lp, off in zip(system.loops, system.row_offsets):
        Jl = lp.jacobian(rho)
        for col, var in enumerate(lp.vars):
            J[off:off + lp.rows, var] += Jl[:, col]
    return J


def numeric_rank(J: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    if J.size == 0:
        return 0
    s = np.linalg.svd(J, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


@dataclass
class RigidityReport:
    jacobian: np.ndarray
    rank: int
    deg: int
    flex_basis: np.ndarray       # j x deg, orthonormal
    stress_basis: np.ndarray     # (3i+6h) x corank, orthonormal
    first_order_rigid: bool
    regular: bool
    rigid_by_first_order: bool   # first-order rigid states are rigid
    residual_norm: float

    @property
    def corank(self) -> int:
        return self.stress_basis.shape[1]


def classify(system: ConstraintSystem, rho, residual_tol: float = RESIDUAL_TOL,
             rank_tol: float = RANK_REL_TOL) -> RigidityReport:
    """Rank/DOF classification of a solved state.

    Raises :class:`NotOnVariety` when the residual exceeds ``residual_tol``.
    """
    rho = np.asarray(rho, dtype=float)
    res = residual(system, rho)
    if not res.satisfied(residual_tol):
        raise NotOnVariety(f"residual max-norm {res.max_norm:.3e} > {residual_tol:.1e}")
    J = jacobian(system, rho)
    m, n = J.shape
    if J.size == 0:
        rank = 0
        flex = np.eye(n)
        stress = np.zeros((m, m))
    else:
        U, s, Vt = np.linalg.svd(J, full_matrices=True)
        rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
        flex = Vt[rank:].T
        stress = U[:, rank:]
    deg = n - rank
    return RigidityReport(
        jacobian=J,
        rank=rank,
        deg=deg,
        flex_basis=flex,
        stress_basis=stress,
        first_order_rigid=(deg == 0),
        regular=(rank == min(m, n)),
        rigid_by_first_order=(deg == 0),
        residual_norm=res.max_norm,
    )


def deg_formula_developable(pattern: CreasePattern) -> int:
    """Flat-state DOF count j - 2i for a developable pattern without holes.

    When every inner vertex has degree at least 4 the count is always
    positive, so that case is asserted rather than validated.
    """
    if pattern.holes:
        raise NotDevelopable("formula applies to patterns without holes")
    for v in pattern.inner_vertices:
        total = float(np.sum(pattern.sector_angles(v)))
        if abs(total - TWO_PI) > 1e-9:
            raise NotDevelopable(f"vertex {v} has sector sum {total:.12f} != 2*pi")
    i = len(pattern.inner_vertices)
    j = pattern.n_vars
    deg0 = j - 2 * i
    if pattern.inner_vertices:
        min_degree = min(len(pattern.vertex_creases[v]) for v in pattern.inner_vertices)
        if min_degree >= 4 and deg0 <= 0:
            raise AssertionError("j - 2i must be positive when all inner degrees >= 4")
    return deg0


# -- angular velocities -----------------------------------------------------

_SX3 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def _rz3(b):
    c, s = math.cos(b), math.sin(b)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rx3(r):
    c, s = math.cos(r), math.sin(r)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _chain_rotation_and_rate(chain: TransferChain, rho, rho_dot):
    """Rotation part of the chain transform and its rate along rho_dot."""
    factors = [(_rz3(st.beta), _rx3(rho[st.var]), st.var) for st in chain.steps]
    prefix = [np.eye(3)]
    for Rz, Rx, _ in factors:
        prefix.append(prefix[-1] @ Rz @ Rx)
    suffix = [np.eye(3)]
    for Rz, Rx, _ in reversed(factors):
        suffix.append(Rz @ Rx @ suffix[-1])
    suffix.reverse()
    dR = np.zeros((3, 3))
    for k, (Rz, Rx, var) in enumerate(factors):
        dR += rho_dot[var] * (prefix[k] @ Rz @ _SX3 @ Rx @ suffix[k + 1])
    return prefix[-1], dR


def angular_velocities(pattern: CreasePattern, rho, rho_dot,
                       system: ConstraintSystem | None = None,
                       chains: dict[int, TransferChain] | None = None,
                       flex_tol: float = 1e-6,
                       identity_tol: float = 1e-8) -> np.ndarray:
    """Per-panel angular velocity of the flex ``rho_dot``.

    omega_K is read off skew(omega_K) = dT_K/dt . T_K^T.  It must satisfy
    rho_dot_K c_K = omega_K - omega_{K-1} along every chain, with c_K the
    folded direction of the crossed crease; the recursion built from that
    identity is compared against the skew computation and a mismatch raises,
    since it would mean the chain algebra is broken.
    """
    rho = np.asarray(rho, dtype=float)
    rho_dot = np.asarray(rho_dot, dtype=float)
    if system is None:
        system = build_system(pattern)
    J = jacobian(system, rho)
    if J.size and rho_dot.size:
        drive = float(np.abs(J @ rho_dot).max())
        scale = max(1.0, float(np.abs(rho_dot).max()))
        if drive > flex_tol * scale:
            raise NotAFlex(f"J . rho_dot has max entry {drive:.3e}")
    if chains is None:
        chains = build_spanning_tree(pattern)

    omegas = np.zeros((len(pattern.panels), 3))
    for p, chain in chains.items():
        R, dR = _chain_rotation_and_rate(chain, rho, rho_dot)
        Om = dR @ R.T
        Om = 0.5 * (Om - Om.T)
        omegas[p] = [Om[2, 1], Om[0, 2], Om[1, 0]]
        # independent accumulation: omega jumps by rho_dot_k c_k per crossing
        omega_rec = np.zeros(3)
        part = np.eye(3)
        for st in chain.steps:
            part = part @ _rz3(st.beta)
            omega_rec = omega_rec + rho_dot[st.var] * part[:, 0]
            part = part @ _rx3(rho[st.var])
        err = float(np.abs(omega_rec - omegas[p]).max())
        if err > identity_tol * max(1.0, float(np.abs(rho_dot).max())):
            raise RuntimeError(f"angular-velocity identity violated: {err:.3e}")
    return omegas


def flex_growth_order(system: ConstraintSystem, rho, direction,
                      eps: float = 1e-3) -> float:
    """Heuristic order of residual growth along a first-order flex.

    Fits the exponent p in ||r(rho + eps d)|| ~ eps^p from two step sizes.
    Values near 2 suggest the flex is blocked at second order; large values
    (or tiny residuals at both steps) suggest a genuine finite motion.  This
    is an experimental probe, not a second-order rigidity test.
    """
    rho = np.asarray(rho, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.abs(d).max()
    r1 = residual(system, rho + eps * d).max_norm
    r2 = residual(system, rho + 2 * eps * d).max_norm
    if r2 < 1e-14:
        return math.inf
    if r1 < 1e-14:
        return math.inf
    return math.log(r2 / r1) / math.log(2.0)
