"""Boundary-weighted Finsler metric, path lengths, and a distance upper bound.

The metric tensor blends d dbar log(1/-r) near the boundary into the
Euclidean metric deep inside, through a quintic smoothstep in r.  Distances
are estimated from above by optimizing piecewise-linear paths; every
consumer in this library treats the optimizer output as the working metric,
so inequalities checked downstream are stated in the direction that stays
valid under over-estimation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DomainSpec, DomainError, normal_direction

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


class MetricError(ValueError):
    pass


# -- tensor -------------------------------------------------------------------


def _smoothstep(x: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 for x<=0, 1 for x>=1, C^2 in between."""
    t = np.clip(x, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def psi_blend(dom: DomainSpec, r_val: np.ndarray) -> np.ndarray:
    """Blend weight: 1 on [-theta, 0), 0 below -2*theta."""
    return _smoothstep((r_val + 2.0 * dom.theta) / dom.theta)


def metric_tensor(dom: DomainSpec, z: np.ndarray) -> np.ndarray:
    """Hermitian positive matrix B(z); quadratic form via :func:`metric_form`.

    For -r(z) <= theta this is exactly the complex Hessian of log(1/-r):
    B = A/(-r) + (dbar r)(dbar r)^H / r^2.
    """
    z = np.asarray(z, dtype=complex)
    rv = dom.r_val(z)
    if np.any(rv >= 0):
        raise MetricError("metric tensor requested outside the open domain")
    psi = psi_blend(dom, rv)
    H = dom.hessian(z)
    g = dom.dbar_r(z)
    # matrix for the form sum B[i,j] xi_i conj(xi_j)
    rank1 = g[..., :, None] * np.conj(g[..., None, :])
    eye = np.eye(dom.n)
    B = (
        psi[..., None, None] * (H / (-rv)[..., None, None] + rank1 / (rv**2)[..., None, None])
        + (1.0 - psi)[..., None, None] * eye
    )
    lam = np.linalg.eigvalsh(np.swapaxes(np.conj(B), -1, -2))
    if np.any(lam[..., 0] <= 0):
        raise MetricError(f"metric tensor lost positive definiteness (min eig {lam[..., 0].min():.3e})")
    return B


def metric_form(dom: DomainSpec, z: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Quadratic form sum B[i,j](z) xi_i conj(xi_j), vectorized, no matrices.

    Faster than building the tensor; used on every quadrature abscissa.
    """
    z = np.asarray(z, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    rv = dom.r_val(z)
    if np.any(rv >= 0):
        raise MetricError("quadrature abscissa escaped the domain")
    psi = psi_blend(dom, rv)
    H = dom.hessian(z)
    g = dom.dbar_r(z)
    levi = np.real(np.einsum("...ij,...i,...j->...", H, xi, np.conj(xi)))
    normal = np.abs(np.einsum("...i,...i->...", xi, np.conj(g))) ** 2
    eucl = np.sum(np.abs(xi) ** 2, axis=-1)
    return psi * (levi / (-rv) + normal / rv**2) + (1.0 - psi) * eucl


# -- paths --------------------------------------------------------------------


@dataclass(frozen=True)
class PathPolyline:
    """Piecewise-linear path through interior nodes, parametrized on [0,1]."""

    nodes: np.ndarray  # (K+1, n) complex

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=complex))

    @property
    def segment_count(self) -> int:
        return len(self.nodes) - 1

    def reversed(self) -> "PathPolyline":
        return PathPolyline(self.nodes[::-1].copy())


def _refinement_breaks(level: int) -> np.ndarray:
    """Sub-interval breakpoints of [0,1], dyadically refined toward both ends.

    The metric speed along a chord varies like 1/(-r), which changes by a
    bounded factor across each dyadic piece, so 4-point Gauss-Legendre per
    piece resolves boundary-hugging segments that a single rule misses.
    """
    level = int(np.clip(level, 0, 48))
    lead = 0.5 ** np.arange(level + 1, 0, -1)
    return np.concatenate([[0.0], lead, 1.0 - lead[::-1], [1.0]])


def _segment_lengths(dom: DomainSpec, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Quadrature lengths of straight segments p->q, vectorized over batches.

    Segments are bucketed by the dyadic range of -r along them, so only
    boundary-hugging segments pay for deep refinement.  Escaped segments
    (any abscissa outside the domain) come back as +inf.
    """
    p = np.asarray(p, complex)
    q = np.asarray(q, complex)
    shape = np.broadcast_shapes(p.shape, q.shape)
    p = np.broadcast_to(p, shape).reshape(-1, shape[-1])
    q = np.broadcast_to(q, shape).reshape(-1, shape[-1])
    dp = np.maximum(-dom.r_val(p), 1e-300)
    dq = np.maximum(-dom.r_val(q), 1e-300)
    mid = np.maximum(-dom.r_val(0.5 * (p + q)), 1e-300)
    hi = np.maximum(mid, np.maximum(dp, dq))
    lo = np.minimum(dp, dq)
    lev = np.clip(np.ceil(np.log2(hi / lo)) + 2, 2, 48)
    bucket = np.clip((np.ceil(lev / 6) * 6).astype(int), 2, 48)
    out = np.empty(len(p))
    for b in np.unique(bucket):
        sel = bucket == b
        out[sel] = _segment_lengths_fixed(dom, p[sel], q[sel], int(b))
    return out.reshape(shape[:-1])


def _segment_lengths_fixed(dom: DomainSpec, p: np.ndarray, q: np.ndarray, level: int) -> np.ndarray:
    v = q - p
    brk = _refinement_breaks(level)
    widths = brk[1:] - brk[:-1]
    t = brk[:-1, None] + widths[:, None] * _GL_T[None, :]  # (pieces, 4)
    w = widths[:, None] * _GL_W[None, :]
    pts = p[:, None, None, :] + t[None, :, :, None] * v[:, None, None, :]
    rv = dom.r_val(pts)
    escaped = np.any(rv >= 0, axis=(-1, -2))
    safe_pts = np.where(rv[..., None] < 0, pts, 0.0)
    speeds2 = metric_form(dom, safe_pts, np.broadcast_to(v[:, None, None, :], pts.shape))
    speeds = np.sqrt(np.maximum(speeds2, 0.0))
    lengths = np.sum(speeds * w, axis=(-1, -2))
    return np.where(escaped, np.inf, lengths)


def path_length(dom: DomainSpec, path: PathPolyline | np.ndarray) -> float:
    nodes = path.nodes if isinstance(path, PathPolyline) else np.asarray(path, complex)
    val = _polyline_length(dom, nodes)
    if not np.isfinite(val):
        raise MetricError("quadrature abscissa escaped the domain; refine the path")
    return float(val)


def _polyline_length(dom: DomainSpec, nodes: np.ndarray) -> float:
    if np.all(np.abs(nodes[1:] - nodes[:-1]) == 0):
        return 0.0
    return float(np.sum(_segment_lengths(dom, nodes[:-1], nodes[1:])))


def _polyline_length_batch(dom: DomainSpec, nodes: np.ndarray) -> np.ndarray:
    """Lengths for a batch of polylines, shape (..., K+1, n) -> (...)."""
    return np.sum(_segment_lengths(dom, nodes[..., :-1, :], nodes[..., 1:, :]), axis=-1)


# -- distance estimation ------------------------------------------------------


@dataclass(frozen=True)
class DistanceBudget:
    """Optimizer budget for the distance upper bound."""

    nodes: int = 64
    max_iters: int = 40
    restarts: int = 2
    seed: int = 0

    def to_json(self) -> dict:
        return {"nodes": self.nodes, "max_iters": self.max_iters, "restarts": self.restarts, "seed": self.seed}


ORACLE_BUDGET = DistanceBudget(nodes=64, max_iters=60, restarts=2)
SCAN_BUDGET = DistanceBudget(nodes=12, max_iters=12, restarts=2)
CHEAP_BUDGET = DistanceBudget(nodes=8, max_iters=0, restarts=1)


def _resample_polyline(nodes: np.ndarray, k_out: int) -> np.ndarray:
    """Re-divide a polyline into k_out segments of equal chord length."""
    seg = np.linalg.norm(nodes[1:] - nodes[:-1], axis=-1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0:
        return np.repeat(nodes[:1], k_out + 1, axis=0)
    targets = np.linspace(0.0, total, k_out + 1)
    out = np.empty((k_out + 1, nodes.shape[1]), dtype=complex)
    j = 0
    for i, t in enumerate(targets):
        while j < len(seg) - 1 and cum[j + 1] < t:
            j += 1
        denom = max(seg[j], 1e-300)
        lam = (t - cum[j]) / denom
        out[i] = nodes[j] + lam * (nodes[j + 1] - nodes[j])
    out[0], out[-1] = nodes[0], nodes[-1]
    return out


def _straight_seed(z: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, k + 1)[:, None]
    return (1 - t) * z[None, :] + t * w[None, :]


def _inward_point(dom: DomainSpec, z: np.ndarray, depth: float) -> np.ndarray:
    """March z along -u_z until -r reaches ``depth`` (or give up shallowly)."""
    if -dom.r_val(z) >= depth:
        return z
    u = normal_direction(dom, z)
    s_lo, s_hi = 0.0, 0.0
    step = depth / max(dom.grad_norm(z) / 2.0, 1e-9)
    for _ in range(60):
        s_hi += step
        if -dom.r_val(z - s_hi * u) >= depth:
            break
        step *= 1.6
    else:
        return z - s_hi * u if dom.r_val(z - s_hi * u) < 0 else z
    for _ in range(60):
        mid = 0.5 * (s_lo + s_hi)
        if -dom.r_val(z - mid * u) >= depth:
            s_hi = mid
        else:
            s_lo = mid
    return z - s_hi * u


def _arc_seed(dom: DomainSpec, z: np.ndarray, w: np.ndarray, k: int) -> np.ndarray | None:
    """Boundary-avoiding seed: retreat both ends inward, then connect."""
    dz, dw = -dom.r_val(z), -dom.r_val(w)
    gap2 = float(np.sum(np.abs(z - w) ** 2))
    depth = min(max(4.0 * max(dz, dw), 0.5 * gap2), dom.theta)
    if depth <= max(dz, dw):
        return None
    zi = _inward_point(dom, z, depth)
    wi = _inward_point(dom, w, depth)
    quarter = max(k // 4, 1)
    middle = k + 1 - 2 * quarter
    legs = [
        _straight_seed(z, zi, quarter)[:-1],
        _straight_seed(zi, wi, max(middle, 1)),
        _straight_seed(wi, w, quarter)[1:],
    ]
    nodes = np.concatenate(legs, axis=0)
    return _resample_polyline(nodes, k)


def _feasible(dom: DomainSpec, nodes: np.ndarray) -> bool:
    v = nodes[1:] - nodes[:-1]
    pts = nodes[:-1, None, :] + _GL_T[None, :, None] * v[:, None, :]
    allp = np.concatenate([pts.reshape(-1, nodes.shape[1]), nodes], axis=0)
    return bool(np.all(dom.r_val(allp) < 0))


def _length_gradient(dom: DomainSpec, nodes: np.ndarray, h: float) -> np.ndarray:
    """Central-difference gradient of the polyline length in the interior nodes.

    Moving one node only changes its two adjacent segments, so the finite
    differences are evaluated on a batch of segment pairs rather than on
    whole polylines.
    """
    k1, n = nodes.shape
    m = k1 - 2
    idx = np.arange(1, k1 - 1)
    grad = np.zeros((m, n), dtype=complex)
    left, mid, right = nodes[idx - 1], nodes[idx], nodes[idx + 1]
    for comp in (1.0, 1j):
        for j in range(n):
            shift = np.zeros((m, n), complex)
            shift[:, j] = comp * h
            # batch: (sign, side) x segments
            p_ends = np.concatenate([mid + shift, mid - shift])  # perturbed node
            starts = np.concatenate([left, left])
            ends = np.concatenate([right, right])
            l_in = _segment_lengths(dom, starts, p_ends)
            l_out = _segment_lengths(dom, p_ends, ends)
            tot = l_in + l_out
            deriv = (tot[:m] - tot[m:]) / (2 * h)
            deriv = np.where(np.isfinite(deriv), deriv, 0.0)
            grad[:, j] += comp * deriv
    return grad


def _optimize_nodes(dom: DomainSpec, nodes: np.ndarray, max_iters: int) -> np.ndarray:
    """Projected gradient descent on interior node positions.

    The objective is the quadrature length; steps that push any abscissa out
    of the domain are rejected by halving, which plays the role of the
    interior barrier.
    """
    if max_iters <= 0 or len(nodes) < 3:
        return nodes
    k1, _ = nodes.shape
    h = 1e-6 * (1.0 + float(np.max(np.abs(nodes))))
    lr = 0.1
    best = _polyline_length(dom, nodes)
    for it in range(max_iters):
        grad = _length_gradient(dom, nodes, h)
        gn = float(np.sqrt(np.sum(np.abs(grad) ** 2)))
        if gn < 1e-12:
            break
        scale = lr * max(np.max(np.abs(nodes[1:-1])), 1e-3) / gn
        improved = False
        for _ in range(12):
            trial = nodes.copy()
            trial[1:-1] = nodes[1:-1] - scale * grad
            val = _polyline_length(dom, trial)
            if np.isfinite(val) and val < best - 1e-14:
                nodes, best, improved = trial, val, True
                break
            scale *= 0.5
        if not improved:
            lr *= 0.5
            if lr < 1e-6:
                break
        if it == max_iters // 2:
            nodes = _resample_polyline(nodes, k1 - 1)
            best = _polyline_length(dom, nodes)
    return nodes


def distance(dom: DomainSpec, z: np.ndarray, w: np.ndarray, budget: DistanceBudget = SCAN_BUDGET) -> dict:
    """Upper bound on the path-infimum distance, with the realizing path.

    Multi-start local optimization: a straight seed plus an inward-retreat
    seed (both directions).  The pair is canonically ordered before
    optimizing, so the estimate is exactly symmetric in (z, w).
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    if dom.r_val(z) >= 0 or dom.r_val(w) >= 0:
        raise MetricError("distance endpoints must be interior")
    if np.array_equal(z, w):
        return {"d_upper": 0.0, "path": PathPolyline(np.stack([z, w])), "converged": True}

    key = tuple(np.concatenate([z.view(float), w.view(float)]))
    key_rev = tuple(np.concatenate([w.view(float), z.view(float)]))
    swapped = key_rev < key
    a, b = (w, z) if swapped else (z, w)

    k = budget.nodes
    seeds = [_straight_seed(a, b, k)]
    if budget.restarts >= 2:
        arc = _arc_seed(dom, a, b, k)
        if arc is not None:
            seeds.append(arc)

    best_len = np.inf
    best_nodes = None
    converged = False
    k_opt = min(k, 16)
    for seed_nodes in seeds:
        if not _feasible(dom, seed_nodes):
            seed_nodes = _arc_seed(dom, a, b, k)
            if seed_nodes is None or not _feasible(dom, seed_nodes):
                continue
        # optimize the shape on a coarse polyline, then refine the node count
        # for quadrature accuracy and polish
        coarse = _resample_polyline(seed_nodes, k_opt) if k_opt < k else seed_nodes
        coarse = _optimize_nodes(dom, coarse, budget.max_iters)
        nodes = _resample_polyline(coarse, k) if k_opt < k else coarse
        if k_opt < k and budget.max_iters > 0:
            nodes = _optimize_nodes(dom, nodes, max(budget.max_iters // 4, 2))
        val = _polyline_length(dom, nodes)
        if val < best_len:
            best_len, best_nodes = val, nodes
            converged = True
    if best_nodes is None:
        raise MetricError("no feasible path seed; endpoints may hug a nonconvex boundary")
    path = PathPolyline(best_nodes if not swapped else best_nodes[::-1].copy())
    return {"d_upper": float(best_len), "path": path, "converged": converged}


def straight_chord_upper(dom: DomainSpec, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorized straight-chord length; +inf where the chord exits the domain.

    z: (n,) or (m, n); w: (m, n).  An infinite value certifies nothing about
    the true distance, so callers treat it as "no upper bound available".
    """
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    if z.ndim == 1:
        z = np.broadcast_to(z, w.shape)
    ok = (dom.r_val(z) < 0) & (dom.r_val(w) < 0)
    out = np.full(w.shape[:-1], np.inf)
    if np.any(ok):
        out[ok] = _segment_lengths(dom, z[ok], w[ok])
    return out


class DistanceEstimator:
    """Memoizing facade: one consistent d_upper per point pair and budget."""

    def __init__(self, dom: DomainSpec, budget: DistanceBudget = SCAN_BUDGET):
        self.dom = dom
        self.budget = budget
        self._memo: dict[bytes, float] = {}

    def __call__(self, z: np.ndarray, w: np.ndarray) -> float:
        z = np.asarray(z, complex).reshape(-1)
        w = np.asarray(w, complex).reshape(-1)
        ka = z.tobytes()
        kb = w.tobytes()
        key = ka + kb if ka <= kb else kb + ka
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        chord = float(straight_chord_upper(self.dom, z, w))
        opt = distance(self.dom, z, w, self.budget)["d_upper"]
        val = min(chord, opt)
        self._memo[key] = val
        return val

    def chord_batch(self, z: np.ndarray, w: np.ndarray) -> np.ndarray:
        return straight_chord_upper(self.dom, z, w)


# -- regions ------------------------------------------------------------------


@dataclass(frozen=True)
class Polydisc:
    """Anisotropic polydisc around ``center``: tangential radius a across the
    axis direction, radius b along it."""

    center: np.ndarray
    axis: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, complex).reshape(-1))
        object.__setattr__(self, "axis", np.asarray(self.axis, complex).reshape(-1))
        if np.linalg.norm(self.axis) == 0:
            raise MetricError("polydisc axis must be nonzero")

    def decompose(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """w - center = u + v with u orthogonal to the axis, v parallel."""
        x = np.asarray(w, complex) - self.center
        e = self.axis / np.linalg.norm(self.axis)
        coef = np.einsum("...i,i->...", x, np.conj(e))
        v = coef[..., None] * e
        u = x - v
        return u, v

    def contains(self, w: np.ndarray) -> np.ndarray:
        u, v = self.decompose(w)
        return (np.linalg.norm(u, axis=-1) < self.a) & (np.linalg.norm(v, axis=-1) < self.b)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples of the polydisc (product of two complex balls)."""
        n = len(self.center)
        e = self.axis / np.linalg.norm(self.axis)
        basis = _orthocomplement_basis(e)
        # tangential: uniform in the (n-1)-complex-dim ball of radius a
        if n > 1:
            t = _ball_uniform(count, n - 1, rng) * self.a
            tang = t @ basis
        else:
            tang = np.zeros((count, 0), complex)
        s = _ball_uniform(count, 1, rng)[:, 0] * self.b
        pts = self.center[None, :] + s[:, None] * e[None, :]
        if n > 1:
            pts = pts + tang
        return pts


def _orthocomplement_basis(e: np.ndarray) -> np.ndarray:
    """Rows: orthonormal basis of the complex orthogonal complement of e."""
    n = len(e)
    m = np.eye(n, dtype=complex) - np.outer(e, np.conj(e))
    q, _ = np.linalg.qr(m)
    cols = [q[:, i] for i in range(n) if abs(np.vdot(e, q[:, i])) < 1e-8]
    return np.array(cols[: n - 1])


def _ball_uniform(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples in the complex unit ball of C^dim."""
    g = rng.standard_normal((count, 2 * dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radius = rng.uniform(0, 1, count) ** (1.0 / (2 * dim))
    pts = g * radius[:, None]
    return pts[:, :dim] + 1j * pts[:, dim:]


def region_contains(dom: DomainSpec, region, w: np.ndarray, budget: DistanceBudget = SCAN_BUDGET) -> bool:
    """Membership for metric balls ("ball", z, a) and Polydisc regions."""
    if isinstance(region, Polydisc):
        return bool(region.contains(w))
    if isinstance(region, tuple) and region[0] == "ball":
        _, z, a = region
        est = DistanceEstimator(dom, budget)
        return est(np.asarray(z, complex), np.asarray(w, complex)) < a
    raise MetricError(f"unknown region {region!r}")


def mu_volume(dom: DomainSpec, membership, superset_sampler, samples: int = 20000, seed: int = 0) -> dict:
    """Monte-Carlo mass of a region for the measure dv/(-r)^(n+1).

    ``superset_sampler(count, rng) -> (points, density)`` draws from any
    region enclosing the target; ``membership(points) -> bool mask`` filters.
    Stratification by dyadic shells of -r happens in the caller's sampler
    where it matters; here we importance-correct by the sampler density.
    """
    rng = np.random.default_rng(seed)
    pts, density = superset_sampler(samples, rng)
    inside = membership(pts) & (dom.r_val(pts) < 0)
    vals = np.zeros(len(pts))
    if np.any(inside):
        rv = dom.r_val(pts[inside])
        vals[inside] = (-rv) ** (-(dom.n + 1)) / density[inside]
    est = float(np.mean(vals))
    err = float(np.std(vals) / np.sqrt(len(vals)))
    return {"estimate": est, "stderr": err}


def uniform_box_sampler(dom: DomainSpec):
    box = dom.bounding_box
    vol = float(np.prod(box[:, 1] - box[:, 0]))

    def draw(count: int, rng: np.random.Generator):
        raw = rng.uniform(box[:, 0], box[:, 1], size=(count, 2 * dom.n))
        pts = raw[:, : dom.n] + 1j * raw[:, dom.n :]
        return pts, np.full(count, 1.0 / vol)

    return draw


def ball_superset_sampler(dom: DomainSpec, z: np.ndarray, a: float, engulf: float = 3.0):
    """Sampler for a polydisc superset of the metric ball D(z, a).

    Uses the tangential sqrt(-r) / normal (-r) scaling with a generous
    engulfing factor; density is uniform on the polydisc.
    """
    z = np.asarray(z, complex).reshape(-1)
    rz = -float(dom.r_val(z))
    axis = dom.dbar_r(z)
    amax = max(a, 0.3)
    pd = Polydisc(z, axis, engulf * (1 + amax) * np.sqrt(rz), engulf * (1 + amax) * rz)
    vol = _polydisc_volume(pd, dom.n)

    def draw(count: int, rng: np.random.Generator):
        pts = pd.sample(count, rng)
        return pts, np.full(count, 1.0 / vol)

    return draw


def _polydisc_volume(pd: Polydisc, n: int) -> float:
    """Lebesgue volume of the polydisc in C^n."""
    from math import factorial, pi

    tang = pi ** (n - 1) / factorial(n - 1) * pd.a ** (2 * (n - 1))
    return tang * pi * pd.b**2


def metric_ball_volume(dom: DomainSpec, z, a: float, samples: int = 20000, seed: int = 0,
                       budget: DistanceBudget = CHEAP_BUDGET) -> dict:
    """mu(D(z, a)) with membership decided by the chord/optimizer bound."""
    z = np.asarray(z, complex).reshape(-1)
    est = DistanceEstimator(dom, budget)
    sampler = ball_superset_sampler(dom, z, a)

    def member(pts):
        inside = dom.r_val(pts) < 0
        out = np.zeros(len(pts), bool)
        idx = np.where(inside)[0]
        if len(idx):
            chords = straight_chord_upper(dom, z, pts[idx])
            near = chords < a
            # optimizer pass only where the chord is inconclusive but close
            maybe = (~near) & (chords < 3.0 * a)
            for i in np.where(maybe)[0]:
                near[i] = est(z, pts[idx[i]]) < a
            out[idx] = near
        return out

    return mu_volume(dom, member, sampler, samples=samples, seed=seed)
