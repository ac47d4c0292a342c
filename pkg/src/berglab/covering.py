"""Boundary covering: caps, packings, cells, cutoffs, and index partitions.

The construction stacks levels of boundary caps.  Within a level with base
depth t the cap gauge radius is m*t, the cell caps are C1 and C1^2 times
wider for the fitted engulfing constant C1, and the cell depth bands are
the dyadic windows [t*sigma^2, t*sigma) (inner cells) and (t*sigma^3, t)
(outer cells), where sigma is the level shrink factor.  The textbook
instance ties sigma = 2^-m to the profile parameter m; coordinate doubles
cannot resolve those depths for any profile-valid m, so the level ladder is
configurable and the default desk ladder keeps every within-level relation
while pinning the depths to numerically representable scales (see the
decisions ledger).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainSpec, DomainError, boundary_project, normal_direction, surface_sample
from .gauge import normal_gauge, cap_contains
from .metric import DistanceBudget, CHEAP_BUDGET, straight_chord_upper


class CoverError(ValueError):
    pass


# -- engulfing constant ---------------------------------------------------------


def fit_engulfing_constant(
    dom: DomainSpec,
    scales=(0.05, 0.02, 0.008),
    pairs: int = 40,
    cap_samples: int = 200,
    seed: int = 0,
    margin: float = 1.15,
) -> float:
    """Fitted C1: overlapping caps of radius t sit inside the C1*t cap.

    For sampled cap pairs with a common point, C1 is the smallest factor
    engulfing one cap in the other's dilation; the fit reports the max over
    the scan times a safety margin.
    """
    rng = np.random.default_rng(seed)
    pool, _ = _boundary_pool(dom, 4000, seed)
    worst = 1.0
    for t in scales:
        for _ in range(pairs):
            zeta = pool[rng.integers(len(pool))]
            near = pool[normal_gauge(dom, zeta, pool) < 4.0 * t]
            if len(near) < 2:
                continue
            xi = near[rng.integers(len(near))]
            if not (cap_contains(dom, zeta, t, xi.reshape(1, -1))[0] or np.any(
                cap_contains(dom, zeta, t, _cap_sample(dom, xi, t, 32, rng))
            )):
                continue
            xs = _cap_sample(dom, xi, t, cap_samples, rng)
            ratio = float(np.max(normal_gauge(dom, zeta, xs))) / t
            worst = max(worst, ratio)
    return margin * worst


def _boundary_pool(dom: DomainSpec, count: int, seed: int):
    key = ("bdrypool", count, seed)
    if key not in dom._cache:
        rng = np.random.default_rng(seed)
        dom._cache[key] = surface_sample(dom, 0.0, count, rng)
    return dom._cache[key]


def _cap_sample(dom: DomainSpec, center: np.ndarray, t: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Boundary points inside the cap around ``center``, by local parametrization.

    Tangential directions move like sqrt(t), the rotated normal direction
    like t; candidates are projected back to the boundary and filtered by
    the cap inequality.
    """
    center = np.asarray(center, complex).reshape(-1)
    u = normal_direction(dom, center)
    basis = _complex_tangent_basis(u)
    out = []
    guard = 0
    while sum(len(o) for o in out) < count and guard < 60:
        guard += 1
        m = max(2 * count, 64)
        tang = np.zeros((m, dom.n), complex)
        if dom.n > 1:
            coef = rng.uniform(-1, 1, (m, dom.n - 1)) + 1j * rng.uniform(-1, 1, (m, dom.n - 1))
            tang = coef @ basis * np.sqrt(t)
        rot = rng.uniform(-1, 1, m) * t
        cand = center[None, :] + tang + 1j * rot[:, None] * u[None, :]
        cand = _project_boundary_batch(dom, cand)
        keep = cap_contains(dom, center, t, cand)
        kept = cand[keep]
        if len(kept):
            out.append(kept)
    if not out:
        raise CoverError("cap sampler produced no points; cap below resolution")
    return np.concatenate(out, axis=0)[:count]


def _complex_tangent_basis(u: np.ndarray) -> np.ndarray:
    n = len(u)
    if n == 1:
        return np.zeros((0, 1), complex)
    proj = np.eye(n, dtype=complex) - np.outer(u, np.conj(u))
    q, _ = np.linalg.qr(proj)
    cols = [q[:, i] for i in range(n) if abs(np.vdot(u, q[:, i])) < 1e-8]
    return np.array(cols[: n - 1])


def _project_boundary_batch(dom: DomainSpec, pts: np.ndarray, iters: int = 40) -> np.ndarray:
    z = np.array(pts, complex)
    for _ in range(iters):
        val = dom.r_val(z)
        if np.all(np.abs(val) <= dom.boundary_tol):
            break
        g = dom.dbar_r(z)
        gn2 = np.sum(np.abs(g) ** 2, axis=-1)
        z = z - (val / np.maximum(2.0 * gn2, 1e-30))[..., None] * g
    return z


# -- cover structure --------------------------------------------------------------


@dataclass(frozen=True)
class CoverLevel:
    index: int  # 1-based level index
    t: float  # base depth (top of the outer cell band)
    d: float  # packing cap radius
    a: float  # inner cell cap radius
    b: float  # outer cell cap radius
    depth_a: tuple[float, float]  # [lo, hi) of the inner band
    depth_b: tuple[float, float]  # (lo, hi) of the outer band
    centers: np.ndarray
    z_reps: np.ndarray
    colors: np.ndarray

    @property
    def kappa(self) -> int:
        return (self.index - 1) % 3 + 1

    def a_cell_mask(self, dom: DomainSpec, pts: np.ndarray, proj: np.ndarray, u_idx: int) -> np.ndarray:
        depth = -dom.r_val(pts)
        in_band = (depth >= self.depth_a[0]) & (depth < self.depth_a[1])
        in_cap = cap_contains(dom, self.centers[u_idx], self.a, proj)
        return in_band & in_cap

    def b_cell_mask(self, dom: DomainSpec, pts: np.ndarray, proj: np.ndarray, u_idx: int) -> np.ndarray:
        depth = -dom.r_val(pts)
        in_band = (depth > self.depth_b[0]) & (depth < self.depth_b[1])
        in_cap = cap_contains(dom, self.centers[u_idx], self.b, proj)
        return in_band & in_cap


@dataclass(frozen=True)
class Cover:
    dom: DomainSpec
    m: float  # cutoff profile parameter; also the cap radius prefactor
    c1: float
    sigma: float  # level shrink factor
    levels: list[CoverLevel]
    n0_observed: int
    n0_bound: float
    ramp_radius: float
    cell_samples: dict = field(default_factory=dict, repr=False, compare=False)

    def ramp(self, x: np.ndarray) -> np.ndarray:
        """Piecewise-linear profile: 1 at 0, 0 beyond the ramp radius."""
        return np.clip(1.0 - np.asarray(x, float) / self.ramp_radius, 0.0, 1.0)

    def to_json(self) -> str:
        doc = {
            "m": self.m,
            "c1": self.c1,
            "sigma": self.sigma,
            "n0_observed": self.n0_observed,
            "n0_bound": self.n0_bound,
            "ramp_radius": self.ramp_radius,
            "levels": [
                {
                    "index": lv.index,
                    "t": lv.t,
                    "d": lv.d,
                    "a": lv.a,
                    "b": lv.b,
                    "depth_a": list(lv.depth_a),
                    "depth_b": list(lv.depth_b),
                    "centers": _c2j(lv.centers),
                    "z_reps": _c2j(lv.z_reps),
                    "colors": lv.colors.tolist(),
                }
                for lv in self.levels
            ],
        }
        return json.dumps(doc, sort_keys=True)


def _c2j(arr: np.ndarray) -> list:
    return [[float(x) for x in np.concatenate([p.real, p.imag])] for p in arr]


# -- packing ------------------------------------------------------------------------


COVERAGE_SLACK = 1.2


def build_packing(
    dom: DomainSpec,
    d: float,
    c1: float,
    candidate_count: int = 20000,
    seed: int = 0,
    coverage_check: bool = True,
    max_centers: int = 40000,
    max_candidates: int = 300000,
) -> np.ndarray:
    """Greedy maximal packing of boundary caps of gauge radius d.

    A candidate joins when it lies outside every accepted center's c1*d cap
    (both orientations), a sufficient disjointness surrogate.  Coverage is
    audited on a fresh boundary pool at the maximality radius inflated by
    the recorded slack, since stream-relative maximality only covers unseen
    points up to the stream density; a failed audit densifies the stream
    and rebuilds until the audit passes or the budget runs out.
    """
    count = candidate_count
    while True:
        centers = _greedy_packing(dom, d, c1, count, seed, max_centers)
        if not coverage_check:
            return centers
        audit_pool, _ = _boundary_pool(dom, max(count // 2, 2000), seed + 77)
        uncovered = coverage_audit(dom, centers, COVERAGE_SLACK * c1 * d, audit_pool)
        if uncovered is None:
            return centers
        if count >= max_candidates:
            raise CoverError(
                f"coverage audit failed at stream size {count}; uncovered boundary sample "
                f"{uncovered.tolist()}"
            )
        count = min(2 * count, max_candidates)


def _greedy_packing(dom, d, c1, candidate_count, seed, max_centers) -> np.ndarray:
    pool, _ = _boundary_pool(dom, candidate_count, seed)
    rng = np.random.default_rng(seed + 1)
    cand = pool[rng.permutation(len(pool))]
    acc = np.empty((max_centers, dom.n), complex)
    gacc = np.empty((max_centers, dom.n), complex)
    m = 0
    for v in cand:
        g_v = dom.dbar_r(v)
        if m:
            diff = acc[:m] - v[None, :]
            gauge_from_v = np.sum(np.abs(diff) ** 2, axis=-1) + np.abs(
                np.einsum("mi,i->m", -diff, np.conj(g_v))
            )
            gauge_from_u = np.sum(np.abs(diff) ** 2, axis=-1) + np.abs(
                np.einsum("mi,mi->m", diff, np.conj(gacc[:m]))
            )
            if not np.all(np.minimum(gauge_from_v, gauge_from_u) >= c1 * d):
                continue
        if m >= max_centers:
            raise CoverError("packing exceeded the center budget; enlarge the cap scale")
        acc[m] = v
        gacc[m] = g_v
        m += 1
    return acc[:m].copy()


def coverage_audit(dom: DomainSpec, centers: np.ndarray, a: float, pool: np.ndarray):
    """None when every pool point lies in some a-cap; else a witness point."""
    covered = np.zeros(len(pool), bool)
    for u in centers:
        covered |= cap_contains(dom, u, a, pool)
        if np.all(covered):
            return None
    if np.all(covered):
        return None
    return pool[int(np.argmin(covered))]


# -- cells, representatives, cutoffs ----------------------------------------------------


def _inward_points_at_depth(dom: DomainSpec, zs: np.ndarray, depth: float) -> np.ndarray:
    """Points at the requested boundary distance on each normal ray, batched.

    Walks inward or outward as needed; the defining function is monotone
    along the normal through the collar, so bisection settles it.
    """
    zs = np.asarray(zs, complex).reshape(-1, dom.n)
    depth = np.broadcast_to(np.asarray(depth, float), (len(zs),))
    current = -dom.r_val(zs)
    done = np.abs(current - depth) <= 1e-14 * depth
    g = dom.dbar_r(zs)
    u = g / np.linalg.norm(g, axis=-1, keepdims=True)
    sign = np.where(current < depth, -1.0, 1.0)  # -u walks inward
    step = np.abs(depth - current) / np.maximum(dom.grad_norm(zs) / 2.0, 1e-12)
    s_hi = step.copy()

    def reached(s):
        val = -dom.r_val(zs + (sign * s)[:, None] * u)
        return np.where(sign < 0, val >= depth, val <= depth) | done

    for _ in range(200):
        ok = reached(s_hi)
        if np.all(ok):
            break
        s_hi = np.where(ok, s_hi, s_hi * 1.5)
    else:
        raise CoverError("cannot reach the requested depth along the normal ray")
    s_lo = np.zeros_like(s_hi)
    for _ in range(80):
        mid = 0.5 * (s_lo + s_hi)
        ok = reached(mid)
        s_hi = np.where(ok, mid, s_hi)
        s_lo = np.where(ok, s_lo, mid)
    out = zs + (sign * s_hi)[:, None] * u
    out[done] = zs[done]
    return out


def _inward_point_at_depth(dom: DomainSpec, z: np.ndarray, depth: float) -> np.ndarray:
    return _inward_points_at_depth(dom, np.asarray(z, complex).reshape(1, -1), depth)[0]


def build_cells(dom: DomainSpec, level: CoverLevel, u_idx: int) -> dict:
    """Membership predicates for the two nested cells plus the representative."""
    center = level.centers[u_idx]

    def a_cell(pts):
        pts = np.asarray(pts, complex).reshape(-1, dom.n)
        proj = _project_boundary_batch(dom, pts)
        return level.a_cell_mask(dom, pts, proj, u_idx)

    def b_cell(pts):
        pts = np.asarray(pts, complex).reshape(-1, dom.n)
        proj = _project_boundary_batch(dom, pts)
        return level.b_cell_mask(dom, pts, proj, u_idx)

    z_rep = level.z_reps[u_idx]
    return {"a_cell": a_cell, "b_cell": b_cell, "z_rep": z_rep, "center": center}


def _rep_depth(level: CoverLevel) -> float:
    return float(np.sqrt(level.depth_a[0] * level.depth_a[1]))


def a_cell_samples(cover: Cover, li: int, u_idx: int, count: int = 16, seed: int = 0) -> np.ndarray:
    """Interior samples of the inner cell (audit probes)."""
    key = (li, u_idx, count, seed)
    if key not in cover.cell_samples:
        dom = cover.dom
        level = cover.levels[li]
        rng = np.random.default_rng(seed + 7919 * u_idx + li)
        caps = _cap_sample(dom, level.centers[u_idx], level.a, count, rng)
        lo, hi = level.depth_a
        depths = np.exp(rng.uniform(np.log(lo * 1.01), np.log(hi * 0.99), len(caps)))
        cover.cell_samples[key] = _inward_points_at_depth(dom, caps, depths)
    return cover.cell_samples[key]


def distance_to_cell(cover: Cover, li: int, u_idx: int, pts: np.ndarray) -> np.ndarray:
    """Upper bound on the distance to the inner cell, zero on the cell itself.

    The witness path first clamps the depth along the inward normal into the
    cell's band, then slides the boundary shadow into the cap along a
    projected chord; its quadrature length bounds the true distance and
    varies continuously with the query point.
    """
    dom = cover.dom
    level = cover.levels[li]
    center = level.centers[u_idx]
    pts = np.asarray(pts, complex).reshape(-1, dom.n)
    out = np.full(len(pts), np.inf)
    depth = -dom.r_val(pts)
    lo, hi = level.depth_a
    lo_t, hi_t = lo * 1.02, hi * 0.98

    # a wide depth prefilter: beyond it the depth leg alone exceeds the ramp
    band_lo = lo * 2.0 ** (-4 * (cover.ramp_radius + 2))
    band_hi = min(hi * 2.0 ** (12 * (cover.ramp_radius + 2)), 1.0)
    sel = (depth > band_lo) & (depth < band_hi) & (depth > 0)
    if not np.any(sel):
        return out
    idx = np.where(sel)[0]
    zs = pts[idx]
    clamped = np.clip(depth[idx], lo_t, hi_t)
    z_mid = _inward_points_at_depth(dom, zs, clamped)
    leg1 = np.where(
        np.abs(depth[idx] - clamped) <= 1e-12 * clamped, 0.0, straight_chord_upper(dom, zs, z_mid)
    )

    proj = _project_boundary_batch(dom, z_mid)
    gz = normal_gauge(dom, center, proj)
    inside_cap = gz < level.a
    w_star = z_mid.copy()
    need = ~inside_cap
    if np.any(need):
        targets = _slide_into_cap(dom, center, proj[need], level.a * 0.98)
        w_star[need] = _inward_points_at_depth(dom, targets, clamped[need])
    leg2 = np.where(inside_cap, 0.0, straight_chord_upper(dom, z_mid, w_star))
    out[idx] = leg1 + leg2
    return out


def _slide_into_cap(dom: DomainSpec, center: np.ndarray, pts: np.ndarray, target_gauge: float) -> np.ndarray:
    """Boundary points moved toward the cap center until inside the cap.

    Walks the projected chord point -> center by bisection in the blend
    parameter; the gauge is zero at the center, so a crossing always exists.
    """
    lam_lo = np.zeros(len(pts))
    lam_hi = np.ones(len(pts))
    for _ in range(40):
        lam = 0.5 * (lam_lo + lam_hi)
        cand = _project_boundary_batch(dom, pts + lam[:, None] * (center[None, :] - pts))
        inside = normal_gauge(dom, center, cand) < target_gauge
        lam_hi = np.where(inside, lam, lam_hi)
        lam_lo = np.where(inside, lam_lo, lam)
    return _project_boundary_batch(dom, pts + lam_hi[:, None] * (center[None, :] - pts))


def cutoff_value(cover: Cover, li: int, u_idx: int, pts: np.ndarray) -> np.ndarray:
    """Ramp of the distance-to-cell upper bound; one on the cell itself."""
    return cover.ramp(distance_to_cell(cover, li, u_idx, pts))


# -- index partition --------------------------------------------------------------------


def _overlap_counts(dom: DomainSpec, centers: np.ndarray, b: float) -> np.ndarray:
    """Conflict adjacency via a complete overlap surrogate at radius b.

    Two b-caps can only intersect when either center lies in the other's
    6*b dilation (triangle-type estimate with the gradient Lipschitz slack),
    so this adjacency over-approximates true overlap; coloring against it
    stays sound and the observed-count budget stays an upper bound.
    """
    m = len(centers)
    adj = np.zeros((m, m), bool)
    grads = dom.dbar_r(centers)
    for i in range(m):
        diff = centers - centers[i][None, :]
        gauge_i = np.sum(np.abs(diff) ** 2, axis=-1) + np.abs(np.einsum("mi,i->m", diff, np.conj(grads[i])))
        adj[i] = gauge_i < 6.0 * b
    adj |= adj.T
    np.fill_diagonal(adj, False)
    return adj


def index_partition(dom: DomainSpec, centers: np.ndarray, b: float, seed: int = 0) -> tuple[np.ndarray, int]:
    """Greedy coloring of the cap-overlap graph; returns (colors, observed max overlap)."""
    adj = _overlap_counts(dom, centers, b)
    degree = adj.sum(axis=1)
    n0_observed = int(degree.max()) + 1 if len(degree) else 1
    colors = -np.ones(len(centers), int)
    for i in np.argsort(-degree):
        used = set(colors[j] for j in np.where(adj[i])[0] if colors[j] >= 0)
        c = 0
        while c in used:
            c += 1
        colors[i] = c
    return colors, n0_observed


# -- orchestration ----------------------------------------------------------------------


def default_ladder(dom: DomainSpec, m: float) -> tuple[list[float], float]:
    """Desk-scale level depths and shrink factor for the given profile m.

    Chosen so cap counts stay in the thousands and every depth band clears
    the coordinate resolution floor; the textbook ladder t_j = 2^(-j m),
    sigma = 2^-m is available through explicit arguments instead.
    """
    if dom.n == 1:
        return [2.0**-11, 2.0**-16], 2.0**-5
    return [2.0**-9], 2.0**-5


def _stream_size_for(dom: DomainSpec, d: float, base: int, seed: int) -> int:
    """Candidate stream size that resolves caps of gauge radius d.

    Measured from the fraction of a probe pool inside quarter-radius caps,
    so the greedy stream leaves no uncovered gap at the cap scale.
    """
    pool, _ = _boundary_pool(dom, 4000, seed + 31)
    rng = np.random.default_rng(seed + 13)
    fracs = []
    for _ in range(8):
        zeta = pool[rng.integers(len(pool))]
        fracs.append(float(np.mean(normal_gauge(dom, zeta, pool) < d / 4.0)))
    frac = max(np.mean(fracs), 1e-6)
    return int(np.clip(8.0 / frac, base, 200000))


def build_cover(
    dom: DomainSpec,
    m: float = 65.0,
    ladder: list[float] | None = None,
    sigma: float | None = None,
    c1: float | None = None,
    candidate_count: int = 20000,
    seed: int = 0,
    cap_prefactor: float | None = None,
) -> Cover:
    """Assemble packings, cells, representatives and the index partition."""
    if m / 13.0 <= 4.0:
        raise CoverError("profile parameter must satisfy m/13 > 4")
    if ladder is None or sigma is None:
        lad, sig = default_ladder(dom, m)
        ladder = ladder if ladder is not None else lad
        sigma = sigma if sigma is not None else sig
    if c1 is None:
        c1 = fit_engulfing_constant(dom, seed=seed)
    pref = m if cap_prefactor is None else cap_prefactor
    ramp_radius = m / 13.0 - 4.0

    levels = []
    n0_obs = 1
    for j, t in enumerate(ladder, start=1):
        d = pref * t
        a = COVERAGE_SLACK * c1 * d
        b = c1 * a
        depth_a = (t * sigma**2, t * sigma)
        depth_b = (t * sigma**3, t)
        if depth_b[0] < 1e-13:
            raise CoverError("ladder descends below coordinate resolution")
        stream = _stream_size_for(dom, d, candidate_count, seed + j)
        centers = build_packing(dom, d, c1, candidate_count=stream, seed=seed + j)
        z_reps = _inward_points_at_depth(dom, centers, np.sqrt(depth_a[0] * depth_a[1]))
        colors, n0_here = index_partition(dom, centers, b, seed=seed + 100 + j)
        n0_obs = max(n0_obs, n0_here, int(colors.max()) + 1)
        levels.append(
            CoverLevel(j, t, d, a, b, depth_a, depth_b, centers, z_reps, colors)
        )
    n0_bound = _apriori_overlap_bound(dom.n, c1)
    return Cover(dom, m, c1, sigma, levels, n0_obs, n0_bound, ramp_radius)


def _apriori_overlap_bound(n: int, c1: float) -> float:
    """Counting-bound form of the overlap cap: C * (C1^2)^n with C fitted to 1."""
    return float((c1**2) ** n)


def class_indices(cover: Cover, nu: int, kappa: int) -> list[tuple[int, int]]:
    """(level_index, center_index) pairs of the class with color nu and residue kappa."""
    out = []
    for li, lv in enumerate(cover.levels):
        if lv.kappa != kappa:
            continue
        for ui in np.where(lv.colors == nu)[0]:
            out.append((li, int(ui)))
    return out


def family_cutoff(cover: Cover, members: list[tuple[int, int]], squared: bool = False):
    """Callable f_I (or F_I when squared) summing the member cutoffs."""

    def f(pts):
        pts = np.asarray(pts, complex).reshape(-1, cover.dom.n)
        total = np.zeros(len(pts))
        for li, ui in members:
            v = cutoff_value(cover, li, ui, pts)
            total += v**2 if squared else v
        return total

    return f


def textbook_ladder(m: int, j_max: int) -> tuple[list[float], float]:
    """The literal ladder t_j = 2^(-j m) with shrink 2^-m."""
    return [2.0 ** (-j * m) for j in range(1, j_max + 1)], 2.0 ** (-m)
