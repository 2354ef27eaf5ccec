"""Panel self-intersection detection and stacking-order validation.

States on the constraint variety still have to avoid interpenetration of
panels; those excluded states form the boundary constraints of the
configuration space.  Testing is panel-level: panels are ear-clipped into
triangles once (in reference coordinates) and folded triangles are tested
pairwise.  Separations below ``eps`` count as contact, never as crossing,
because flat stacked states live exactly on the boundary of the excluded
set.  Coplanar overlapping pairs are the slots where a stacking sign is
meaningful; adjacent panels are skipped entirely (their hinge and their
+-pi stacking are encoded by the folding angle itself).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constraints import RESIDUAL_TOL, ConstraintSystem, build_system, residual
from .errors import NotOnVariety
from .kinematics import build_spanning_tree, fold_mesh
from .model import CreasePattern

EPS_CONTACT = 1e-9
EPS_AREA = 1e-10


# -- triangulation ---------------------------------------------------------

def _cross2(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _point_in_tri2(p, a, b, c, eps=1e-12):
    d1 = _cross2(a, b, p)
    d2 = _cross2(b, c, p)
    d3 = _cross2(c, a, p)
    return d1 >= -eps and d2 >= -eps and d3 >= -eps


def ear_clip(poly: np.ndarray) -> list[tuple[int, int, int]]:
    """Deterministic ear clipping of a simple CCW polygon (2-d)."""
    idx = list(range(len(poly)))
    tris: list[tuple[int, int, int]] = []
    while len(idx) > 3:
        n = len(idx)
        clipped = False
        for pos in range(n):
            i0, i1, i2 = idx[pos - 1], idx[pos], idx[(pos + 1) % n]
            a, b, c = poly[i0], poly[i1], poly[i2]
            if _cross2(a, b, c) <= 1e-12:
                continue  # reflex or flat corner
            if any(_point_in_tri2(poly[j], a, b, c)
                   for j in idx if j not in (i0, i1, i2)):
                continue
            tris.append((i0, i1, i2))
            del idx[pos]
            clipped = True
            break
        if not clipped:
            # numerically stuck (collinear runs); fall back to a fan
            for k in range(1, len(idx) - 1):
                tris.append((idx[0], idx[k], idx[k + 1]))
            return tris
    tris.append(tuple(idx))
    return tris


# -- triangle-pair tests -----------------------------------------------------

def _plane(tri):
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    nrm = np.linalg.norm(n)
    if nrm == 0.0:
        return np.array([0.0, 0.0, 1.0]), 0.0
    n = n / nrm
    return n, float(n @ tri[0])


def _plane_poly(pts: np.ndarray):
    """Newell-method plane of a (possibly concave) planar polygon."""
    n = np.zeros(3)
    m = len(pts)
    for i in range(m):
        p, q = pts[i], pts[(i + 1) % m]
        n[0] += (p[1] - q[1]) * (p[2] + q[2])
        n[1] += (p[2] - q[2]) * (p[0] + q[0])
        n[2] += (p[0] - q[0]) * (p[1] + q[1])
    nrm = np.linalg.norm(n)
    if nrm == 0.0:
        return np.array([0.0, 0.0, 1.0]), 0.0
    n = n / nrm
    return n, float(n @ pts.mean(axis=0))


def _interval_on_line(tri, dists, direction, eps):
    """Projection interval of the triangle's plane-crossing onto the line."""
    proj = tri @ direction
    cand = []
    for i in range(3):
        if abs(dists[i]) <= eps:
            cand.append(proj[i])
        j = (i + 1) % 3
        if dists[i] * dists[j] < 0.0:
            t = dists[i] / (dists[i] - dists[j])
            cand.append(proj[i] + t * (proj[j] - proj[i]))
    return min(cand), max(cand)


def _clip_convex(subject, cx):
    """Sutherland-Hodgman clip of a convex 2-d polygon against another."""
    out = [p for p in subject]
    m = len(cx)
    for i in range(m):
        a, b = cx[i], cx[(i + 1) % m]
        edge = (b[0] - a[0], b[1] - a[1])
        inp = out
        out = []
        if not inp:
            break
        prev = inp[-1]
        # interior of the CCW clipper lies to the left of each directed edge
        prev_in = edge[0] * (prev[1] - a[1]) - edge[1] * (prev[0] - a[0]) >= -1e-15
        for cur in inp:
            cur_in = edge[0] * (cur[1] - a[1]) - edge[1] * (cur[0] - a[0]) >= -1e-15
            if cur_in != prev_in:
                den = (edge[0] * (cur[1] - prev[1]) - edge[1] * (cur[0] - prev[0]))
                if abs(den) > 1e-300:
                    t = (edge[0] * (a[1] - prev[1]) - edge[1] * (a[0] - prev[0])) / den
                    out.append((prev[0] + t * (cur[0] - prev[0]),
                                prev[1] + t * (cur[1] - prev[1])))
            if cur_in:
                out.append(cur)
            prev, prev_in = cur, cur_in
    return out


def _poly_area2(pts):
    if len(pts) < 3:
        return 0.0
    s = 0.0
    for i in range(len(pts)):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % len(pts)]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2.0


def _tri2_is_ccw(t):
    return _cross2(t[0], t[1], t[2]) > 0


def _coplanar_overlap_area(trisA, trisB, normal):
    """Total 2-d overlap area of two coplanar triangle soups."""
    # build an in-plane basis
    axis = np.argmax(np.abs(normal))
    u = np.zeros(3)
    u[(axis + 1) % 3] = 1.0
    u = u - (u @ normal) * normal
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    area = 0.0
    for ta in trisA:
        pa = [(p @ u, p @ v) for p in ta]
        if not _tri2_is_ccw(pa):
            pa.reverse()
        for tb in trisB:
            pb = [(p @ u, p @ v) for p in tb]
            if not _tri2_is_ccw(pb):
                pb.reverse()
            area += _poly_area2(_clip_convex(pa, pb))
    return area


def _tri_pair_crossing(t1, t2, eps):
    """Do two triangles interpenetrate (beyond the eps contact band)?"""
    n1, d1 = _plane(t1)
    s2 = t2 @ n1 - d1
    if s2.min() > -eps or s2.max() < eps:
        return False  # t2 touches or sits on one side of t1's plane
    n2, d2 = _plane(t2)
    s1 = t1 @ n2 - d2
    if s1.min() > -eps or s1.max() < eps:
        return False
    direction = np.cross(n1, n2)
    nrm = np.linalg.norm(direction)
    if nrm < 1e-14:
        return False  # parallel but both straddling cannot happen; treat as contact
    direction = direction / nrm
    lo1, hi1 = _interval_on_line(t1, s1, direction, eps)
    lo2, hi2 = _interval_on_line(t2, s2, direction, eps)
    return min(hi1, hi2) - max(lo1, lo2) > eps


# -- reports -----------------------------------------------------------------

@dataclass
class ContactReport:
    verdict: str                                   # "free" | "ordered" | "crossing"
    crossing_pairs: list[tuple[int, int]] = field(default_factory=list)
    overlap_pairs: list[dict] = field(default_factory=list)  # {pair, sign}
    conflicts: list[str] = field(default_factory=list)
    cyclic_orders: list[list[int]] = field(default_factory=list)
    stray_pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def free(self) -> bool:
        return self.verdict == "free"


def _normalize_lambda(lambda_pairs):
    """Canonical (a<b) sign table; contradictions become conflict records."""
    table: dict[tuple[int, int], int] = {}
    conflicts = []
    for a, b, s in lambda_pairs or []:
        if s not in (1, -1):
            conflicts.append(f"lambda({a},{b}) has sign {s}, expected +-1")
            continue
        key, sig = ((a, b), s) if a < b else ((b, a), -s)
        if key in table and table[key] != sig:
            conflicts.append(f"lambda conflict on panels {key}")
        else:
            table[key] = sig
    return table, conflicts


def check_state(pattern: CreasePattern, rho, lambda_pairs=None, rho0=None,
                eps: float = EPS_CONTACT, residual_tol: float = RESIDUAL_TOL,
                system: ConstraintSystem | None = None,
                chains=None) -> ContactReport:
    """Boundary-constraint check of a solved state.

    Non-adjacent panel pairs are tested for interpenetration; coplanar
    overlapping pairs become stacking-order slots.  Declared ``lambda_pairs``
    are validated for antisymmetry and contradiction (a contradiction makes
    the verdict "crossing"); cyclic orders within a coplanar cluster are
    reported, not rejected.
    """
    rho = np.asarray(rho, dtype=float)
    if system is None:
        system = build_system(pattern)
    res = residual(system, rho)
    if not res.satisfied(residual_tol):
        raise NotOnVariety(f"residual max-norm {res.max_norm:.3e} > {residual_tol:.1e}")
    if chains is None:
        chains = build_spanning_tree(pattern)
    mesh = fold_mesh(pattern, rho, rho0=rho0, chains=chains)

    if pattern.is_cone:
        tri_ids = [[(0, 1, 2)] for _ in pattern.panels]
    else:
        tri_ids = [ear_clip(pattern.panel_polygon(p)) for p in range(len(pattern.panels))]
    tris = [[np.array([mesh[p][i], mesh[p][j], mesh[p][k]]) for i, j, k in tri_ids[p]]
            for p in range(len(pattern.panels))]

    adjacent = set()
    for p in range(len(pattern.panels)):
        for q, _ in pattern.panel_adjacency[p]:
            adjacent.add((min(p, q), max(p, q)))

    crossing = []
    overlaps = []
    n_panels = len(pattern.panels)
    planes = [_plane_poly(np.asarray(mesh[p])) for p in range(n_panels)]
    for a in range(n_panels):
        na, da = planes[a]
        for b in range(a + 1, n_panels):
            if (a, b) in adjacent:
                continue
            nb, db = planes[b]
            align = float(na @ nb)
            same_plane = (abs(abs(align) - 1.0) <= 1e-9
                          and abs(da - math.copysign(1.0, align) * db) <= eps * 10)
            if same_plane:
                area = _coplanar_overlap_area(tris[a], tris[b], na)
                if area > EPS_AREA:
                    overlaps.append((a, b))
                continue
            if any(_tri_pair_crossing(ta, tb, eps)
                   for ta in tris[a] for tb in tris[b]):
                crossing.append((a, b))

    table, conflicts = _normalize_lambda(lambda_pairs)
    overlap_set = set(overlaps)
    stray = sorted(set(table) - overlap_set)
    overlap_records = [{"pair": pr, "sign": table.get(pr)} for pr in overlaps]

    # strongly-connected "above" relations among coplanar clusters are cycles
    above: dict[int, set[int]] = {}
    for pr, sig in table.items():
        if pr in overlap_set and sig is not None:
            top, bot = (pr[0], pr[1]) if sig > 0 else (pr[1], pr[0])
            above.setdefault(top, set()).add(bot)
    cycles = _find_cycles(above)

    if crossing or conflicts:
        verdict = "crossing"
    elif overlaps:
        verdict = "ordered"
    else:
        verdict = "free"
    return ContactReport(verdict=verdict, crossing_pairs=crossing,
                         overlap_pairs=overlap_records, conflicts=conflicts,
                         cyclic_orders=cycles, stray_pairs=stray)


def _find_cycles(adj: dict[int, set[int]]) -> list[list[int]]:
    """Strongly connected components of size > 1 (cyclic stacking orders)."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = [0]

    def strong(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in adj.get(v, ()):
            if w not in index:
                strong(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            if len(comp) > 1:
                out.append(sorted(comp))

    nodes = set(adj)
    for vs in adj.values():
        nodes.update(vs)
    for v in sorted(nodes):
        if v not in index:
            strong(v)
    return out


@dataclass
class FirstContact:
    index: int
    rho: np.ndarray


def first_contact(pattern: CreasePattern, samples, lambda_pairs=None,
                  eps: float = EPS_CONTACT,
                  refine_tol: float = 1e-6) -> FirstContact | None:
    """Earliest crossing sample of a path, bisection-refined between samples.

    The refinement interpolates linearly in the folding angles, which is the
    documented approximation for localizing the contact; interpolants are
    therefore not re-checked against the constraint variety.  The returned
    state is the first crossing point of the interpolant to ``refine_tol``.
    """
    samples = [np.asarray(s, dtype=float) for s in
               (samples.samples if hasattr(samples, "samples") else samples)]
    system = build_system(pattern)
    chains = build_spanning_tree(pattern)

    def crossing_at(r):
        rep = check_state(pattern, r, lambda_pairs=lambda_pairs, eps=eps,
                          residual_tol=math.inf,
                          system=system, chains=chains)
        return rep.verdict == "crossing"

    hit = None
    for k, s in enumerate(samples):
        if crossing_at(s):
            hit = k
            break
    if hit is None:
        return None
    if hit == 0:
        return FirstContact(0, samples[0])
    lo, hi = samples[hit - 1], samples[hit]
    while float(np.abs(hi - lo).max()) > refine_tol:
        mid = 0.5 * (lo + hi)
        if crossing_at(mid):
            hi = mid
        else:
            lo = mid
    return FirstContact(hit, hi)
