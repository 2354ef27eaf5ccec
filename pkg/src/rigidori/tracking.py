"""Numeric rigid-folding motions on the constraint variety.

``track_flex`` runs tangent-predictor / Gauss-Newton-corrector continuation
from a solved state.  ``track_to`` steers greedily toward a target state and
switches branches through special points when the straight tangent stalls;
its failure is evidence (not proof) that the endpoints are not 0-connected.
``compose_forest`` glues single-loop motions over shared crease angles when
the sharing structure of the loops is a forest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import RANK_REL_TOL, jacobian, numeric_rank
from .constraints import (RESIDUAL_TOL, ConstraintSystem, Loop, residual)
from .errors import (CorrectorDiverged, NonGenericIntersection, NotAFlex,
                     NotForest, NotOnVariety)

DEFAULT_STEP = math.pi / 200
CORRECTOR_TOL = 1e-11
MAX_CORRECTOR_ITER = 25


@dataclass
class FoldPath:
    samples: np.ndarray                    # (m, width)
    residuals: list[float]
    termination: str
    predictor_lengths: list[float] = field(default_factory=list)
    corrector_iterations: list[int] = field(default_factory=list)
    crease_indices: list[int] | None = None  # global variable ids per column

    def __len__(self):
        return len(self.samples)

    @property
    def success(self) -> bool:
        return self.termination in ("target-reached", "composed")

    def monotonicity(self) -> list[str]:
        """Per-crease flag: increasing / decreasing / constant / mixed."""
        out = []
        for col in range(self.samples.shape[1]):
            d = np.diff(self.samples[:, col])
            if np.all(np.abs(d) <= 1e-12):
                out.append("constant")
            elif np.all(d >= -1e-12):
                out.append("increasing")
            elif np.all(d <= 1e-12):
                out.append("decreasing")
            else:
                out.append("mixed")
        return out

    def max_step(self) -> float:
        if len(self.samples) < 2:
            return 0.0
        return float(np.abs(np.diff(self.samples, axis=0)).max())


def gauss_newton_correct(system: ConstraintSystem, rho,
                         tol: float = CORRECTOR_TOL,
                         max_iter: int = MAX_CORRECTOR_ITER):
    """Least-norm Gauss-Newton projection onto the variety.

    The system is usually under-determined, so the minimum-norm step keeps
    the corrected point close to the predictor.  Returns (rho, iterations,
    converged).
    """
    rho = np.asarray(rho, dtype=float).copy()
    for it in range(max_iter):
        res = residual(system, rho)
        if res.max_norm <= tol:
            return rho, it, True
        J = jacobian(system, rho)
        step, *_ = np.linalg.lstsq(J, -res.vector, rcond=1e-12)
        if not np.all(np.isfinite(step)):
            return rho, it, False
        rho = rho + step
        if np.abs(step).max() > 2.0 * math.pi:
            return rho, it + 1, False
    return rho, max_iter, residual(system, rho).max_norm <= tol


def _flex_basis(system, rho, rank_tol=RANK_REL_TOL):
    J = jacobian(system, rho)
    if J.size == 0:
        return np.eye(system.n_vars), 0
    U, s, Vt = np.linalg.svd(J, full_matrices=True)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    return Vt[rank:].T, rank


def track_flex(system: ConstraintSystem, rho0, direction, steps: int = 100,
               step_size: float = DEFAULT_STEP,
               residual_tol: float = RESIDUAL_TOL,
               corrector_tol: float = CORRECTOR_TOL,
               rank_tol: float = RANK_REL_TOL,
               flex_tol: float = 1e-6,
               collision_check=None) -> FoldPath:
    """Continuation from ``rho0`` along a first-order flex.

    Terminates on the step budget, on any folding angle reaching +-pi, on a
    rank drop (branch point), on loss of the tangent, or -- when a
    ``collision_check(rho) -> bool`` is supplied -- on the first crossing
    sample, which is not emitted.  Raises :class:`NotOnVariety`,
    :class:`NotAFlex` or :class:`CorrectorDiverged`.
    """
    rho = np.asarray(rho0, dtype=float).copy()
    res0 = residual(system, rho)
    if not res0.satisfied(residual_tol):
        raise NotOnVariety(f"start residual {res0.max_norm:.3e}")
    direction = np.asarray(direction, dtype=float).copy()
    nrm = np.linalg.norm(direction)
    if nrm == 0.0:
        raise NotAFlex("zero direction")
    direction /= nrm
    J = jacobian(system, rho)
    if J.size and float(np.abs(J @ direction).max()) > flex_tol:
        raise NotAFlex(f"J . direction = {np.abs(J @ direction).max():.3e}")

    samples = [rho.copy()]
    residuals = [res0.max_norm]
    pred_lengths: list[float] = []
    corr_iters: list[int] = []
    tangent = direction
    max_rank_seen = numeric_rank(J, rank_tol)
    termination = "steps"

    for _ in range(steps):
        h = step_size
        accepted = None
        while h >= step_size / 64.0:
            pred = rho + h * tangent
            cand, iters, ok = gauss_newton_correct(system, pred, corrector_tol)
            if (ok and residual(system, cand).max_norm <= residual_tol
                    and float(np.abs(cand - rho).max()) <= 3.0 * h):
                # the continuity bound rejects correctors that jumped branches
                accepted = (cand, iters, h)
                break
            h *= 0.5
        if accepted is None:
            err = CorrectorDiverged(
                f"corrector failed after step halving at sample {len(samples)}")
            err.path = FoldPath(np.array(samples), residuals, "corrector-diverged",
                                pred_lengths, corr_iters)
            raise err
        cand, iters, h = accepted

        if float(np.abs(cand).max()) >= math.pi - 1e-12:
            samples.append(cand)
            residuals.append(residual(system, cand).max_norm)
            pred_lengths.append(h)
            corr_iters.append(iters)
            termination = "angle-bound"
            break

        rank_here = numeric_rank(jacobian(system, cand), rank_tol)
        if rank_here < max_rank_seen:
            samples.append(cand)
            residuals.append(residual(system, cand).max_norm)
            pred_lengths.append(h)
            corr_iters.append(iters)
            termination = "branch-point"
            break
        max_rank_seen = max(max_rank_seen, rank_here)

        if collision_check is not None and collision_check(cand):
            termination = "collision"
            break

        samples.append(cand)
        residuals.append(residual(system, cand).max_norm)
        pred_lengths.append(h)
        corr_iters.append(iters)

        basis, _ = _flex_basis(system, cand, rank_tol)
        new_tan = basis @ (basis.T @ tangent)
        nrm = np.linalg.norm(new_tan)
        if nrm < 1e-9:
            termination = "flex-lost"
            break
        tangent = new_tan / nrm
        rho = cand

    return FoldPath(np.array(samples), residuals, termination,
                    pred_lengths, corr_iters)


def track_to(system: ConstraintSystem, rho_start, rho_target,
             step_size: float = DEFAULT_STEP,
             residual_tol: float = RESIDUAL_TOL,
             corrector_tol: float = CORRECTOR_TOL,
             rank_tol: float = RANK_REL_TOL,
             target_tol: float = 1e-6,
             max_steps: int = 20000) -> FoldPath:
    """Greedy continuation steering the tangent toward a target state.

    Both endpoints must be on the variety.  Success means the terminal
    sample lies within ``target_tol`` of the target in max-norm; failure
    (termination "stalled") is evidence, not proof, that the states are not
    0-connected.  Branch switches through special points are attempted by
    re-projecting short hops toward the target when progress stops.
    """
    rho = np.asarray(rho_start, dtype=float).copy()
    target = np.asarray(rho_target, dtype=float)
    for name, state in (("start", rho), ("target", target)):
        r = residual(system, state)
        if not r.satisfied(residual_tol):
            raise NotOnVariety(f"{name} residual {r.max_norm:.3e}")

    samples = [rho.copy()]
    residuals = [residual(system, rho).max_norm]
    termination = "stalled"
    best_dist = float(np.linalg.norm(rho - target))
    no_progress = 0

    for _ in range(max_steps):
        diff = target - rho
        if float(np.abs(diff).max()) <= target_tol:
            termination = "target-reached"
            break

        basis, _ = _flex_basis(system, rho, rank_tol)
        proj = basis @ (basis.T @ diff)
        pnorm = float(np.linalg.norm(proj))
        moved = False
        if pnorm > 1e-9:
            u = proj / pnorm
            h = min(step_size, float(np.linalg.norm(diff)))
            while h >= step_size / 64.0:
                cand, _, ok = gauss_newton_correct(system, rho + h * u, corrector_tol)
                if (ok and residual(system, cand).max_norm <= residual_tol
                        and float(np.abs(cand).max()) <= math.pi + 1e-9):
                    rho = cand
                    samples.append(rho.copy())
                    residuals.append(residual(system, rho).max_norm)
                    moved = True
                    break
                h *= 0.5

        new_dist = float(np.linalg.norm(rho - target))
        if moved and new_dist < best_dist - 1e-12:
            best_dist = new_dist
            no_progress = 0
            continue
        no_progress += 1

        if no_progress >= 12:
            hopped = _hop_toward(system, rho, target, step_size,
                                 corrector_tol, residual_tol, best_dist)
            if hopped is None:
                termination = "stalled"
                break
            rho = hopped
            samples.append(rho.copy())
            residuals.append(residual(system, rho).max_norm)
            best_dist = float(np.linalg.norm(rho - target))
            no_progress = 0

    else:
        termination = "stalled"

    return FoldPath(np.array(samples), residuals, termination)


def _hop_toward(system, rho, target, step_size, corrector_tol,
                residual_tol, best_dist):
    """Short re-projected hops across a special point toward the target."""
    diff = target - rho
    nrm = float(np.linalg.norm(diff))
    if nrm == 0.0:
        return None
    u = diff / nrm
    for scale in (1.0, 0.5, 2.0, 0.25, 4.0):
        h = min(step_size * scale, nrm)
        cand, _, ok = gauss_newton_correct(system, rho + h * u, corrector_tol)
        if not ok or residual(system, cand).max_norm > residual_tol:
            continue
        if float(np.abs(cand).max()) > math.pi + 1e-9:
            continue
        if float(np.linalg.norm(cand - target)) < best_dist - 1e-10:
            return cand
    return None


# -- single-loop restrictions and forest composition -------------------------

def single_loop_system(system: ConstraintSystem, loop_index: int):
    """Restriction of the system to one loop, with its variable map."""
    loop = system.loops[loop_index]
    var_ids = sorted(set(loop.vars))
    local = {g: k for k, g in enumerate(var_ids)}
    sub = Loop(kind=loop.kind, vars=[local[g] for g in loop.vars],
               betas=loop.betas.copy(), offsets=loop.offsets.copy(),
               label=loop.label)
    return ConstraintSystem(n_vars=len(var_ids), loops=[sub]), var_ids


def loop_flex_path(system: ConstraintSystem, rho, loop_index: int,
                   prefer_var: int | None = None, steps: int = 60,
                   step_size: float = DEFAULT_STEP * 4) -> FoldPath:
    """Two-sided flex path of one loop's restriction through the base state.

    The flex direction is chosen to move ``prefer_var`` (a global variable
    index, typically a shared crease) as much as possible.  Samples span the
    loop's own variables; ``crease_indices`` records their global ids.
    """
    sub, var_ids = single_loop_system(system, loop_index)
    base = np.asarray(rho, dtype=float)[var_ids]
    basis, _ = _flex_basis(sub, base)
    if basis.shape[1] == 0:
        return FoldPath(np.array([base]), [residual(sub, base).max_norm],
                        "rigid", crease_indices=var_ids)
    if prefer_var is not None and prefer_var in var_ids:
        row = var_ids.index(prefer_var)
        weights = basis[row, :]
        if np.abs(weights).max() < 1e-12:
            direction = basis[:, 0]
        else:
            direction = basis @ weights
    else:
        direction = basis[:, 0]
    direction = direction / np.linalg.norm(direction)

    fwd = track_flex(sub, base, direction, steps=steps, step_size=step_size)
    back = track_flex(sub, base, -direction, steps=steps, step_size=step_size)
    merged = np.vstack([back.samples[::-1], fwd.samples[1:]])
    resid = back.residuals[::-1] + fwd.residuals[1:]
    return FoldPath(merged, resid, "two-sided", crease_indices=var_ids)


def _sharing_forest(system: ConstraintSystem):
    """Edges of the loop-sharing multigraph; NotForest on any cycle.

    Two loops sharing more than one crease already close a cycle through the
    shared panels, so multi-edges are rejected along with genuine cycles.
    """
    n = len(system.loops)
    var_sets = [set(lp.vars) for lp in system.loops]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for a in range(n):
        for b in range(a + 1, n):
            shared = sorted(var_sets[a] & var_sets[b])
            if not shared:
                continue
            if len(shared) > 1:
                raise NotForest(
                    f"loops {a} and {b} share {len(shared)} creases")
            ra, rb = find(a), find(b)
            if ra == rb:
                raise NotForest(f"loop sharing graph has a cycle through loops "
                                f"{a} and {b}")
            parent[ra] = rb
            edges.append((a, b, shared[0]))
    return edges


def _monotone_window(values: np.ndarray, center: int):
    """Largest strictly monotone index window of ``values`` containing center."""
    lo = hi = center
    if len(values) < 2:
        return lo, hi
    inc = None
    while hi + 1 < len(values):
        d = values[hi + 1] - values[hi]
        if abs(d) < 1e-15:
            break
        s = d > 0
        if inc is None:
            inc = s
        if s != inc:
            break
        hi += 1
    while lo - 1 >= 0:
        d = values[lo] - values[lo - 1]
        if abs(d) < 1e-15:
            break
        s = d > 0
        if inc is None:
            inc = s
        if s != inc:
            break
        lo -= 1
    return lo, hi


def compose_forest(system: ConstraintSystem, rho, per_loop_paths: dict[int, FoldPath],
                   n_samples: int = 41, residual_tol: float = RESIDUAL_TOL,
                   corrector_tol: float = CORRECTOR_TOL) -> FoldPath:
    """Glue single-loop motions into a global path through ``rho``.

    Requires the loop-sharing structure to be a forest (else
    :class:`NotForest`).  Neighbouring paths are re-parameterized by their
    shared crease angle over the intersection of attainable ranges; an
    intersection that degenerates to a single point raises
    :class:`NonGenericIntersection` rather than guessing.  Loops without a
    supplied path are held fixed at their ``rho`` restriction.
    """
    rho = np.asarray(rho, dtype=float)
    edges = _sharing_forest(system)  # structural check first
    base_res = residual(system, rho)
    if not base_res.satisfied(residual_tol):
        raise NotOnVariety(f"base residual {base_res.max_norm:.3e}")

    n_loops = len(system.loops)
    paths: dict[int, FoldPath] = {}
    for k in range(n_loops):
        if k in per_loop_paths:
            paths[k] = per_loop_paths[k]
        else:
            _, var_ids = single_loop_system(system, k)
            paths[k] = FoldPath(np.array([rho[var_ids]]), [0.0], "rigid",
                                crease_indices=var_ids)

    # master grid rows; every loop contributes an angle track per row, and
    # rows whose shared angle leaves a child's attainable range are dropped
    composed = np.tile(rho, (n_samples, 1))
    valid = np.ones(n_samples, dtype=bool)
    placed: set[int] = set()
    adj: dict[int, list[tuple[int, int]]] = {k: [] for k in range(n_loops)}
    for a, b, shared in edges:
        adj[a].append((b, shared))
        adj[b].append((a, shared))

    for root in range(n_loops):
        if root in placed:
            continue
        _place_root(composed, paths[root], rho)
        placed.add(root)
        stack = [root]
        while stack:
            a = stack.pop()
            for b, shared in adj[a]:
                if b in placed:
                    continue
                _glue_child(composed, valid, paths[b], rho, shared)
                placed.add(b)
                stack.append(b)

    kept = composed[valid]
    if len(kept) < 2:
        raise NonGenericIntersection(
            "shared-angle ranges intersect in at most one point")
    polished = []
    residuals = []
    for row in kept:
        cand, _, ok = gauss_newton_correct(system, row, corrector_tol)
        r = residual(system, cand)
        if not ok or not r.satisfied(residual_tol):
            raise CorrectorDiverged("composed sample failed to polish")
        polished.append(cand)
        residuals.append(r.max_norm)
    return FoldPath(np.array(polished), residuals, "composed")


def _monotone_track(path: FoldPath, base_sub: np.ndarray, col: int):
    """Monotone stretch of the path's ``col`` angle around the base state."""
    d = np.abs(path.samples - base_sub).max(axis=1)
    center = int(np.argmin(d))
    lo, hi = _monotone_window(path.samples[:, col], center)
    return path.samples[lo:hi + 1]


def _place_root(composed, path: FoldPath, rho):
    """Resample a root path evenly over the master grid rows."""
    var_ids = path.crease_indices
    m = len(path.samples)
    if m == 1:
        composed[:, var_ids] = path.samples[0]
        return
    src = np.linspace(0, m - 1, len(composed))
    for k, g in enumerate(var_ids):
        composed[:, g] = np.interp(src, np.arange(m), path.samples[:, k])


def _glue_child(composed, valid, path: FoldPath, rho, shared_var):
    """Re-parameterize a child path by the shared angle already in place."""
    var_ids = path.crease_indices
    if shared_var not in var_ids:
        raise NotForest("child path does not cover the shared crease")
    col = var_ids.index(shared_var)
    base_sub = np.asarray(rho, dtype=float)[var_ids]
    track = _monotone_track(path, base_sub, col)
    svals = track[:, col]
    if len(svals) < 2 or abs(svals[-1] - svals[0]) < 1e-12:
        raise NonGenericIntersection(
            f"shared-angle range of crease {shared_var} degenerates to a point")
    order = np.argsort(svals)
    svals_sorted = svals[order]
    track_sorted = track[order]
    want = composed[:, shared_var]
    in_range = (want >= svals_sorted[0] - 1e-12) & (want <= svals_sorted[-1] + 1e-12)
    valid &= in_range
    for k, g in enumerate(var_ids):
        if g == shared_var:
            continue
        composed[:, g] = np.interp(np.clip(want, svals_sorted[0], svals_sorted[-1]),
                                   svals_sorted, track_sorted[:, k])
