"""Bounded strongly pseudo-convex domains given by polynomial defining functions.

A domain is the sublevel set {r < 0} of a real polynomial r in (z, conj(z)).
The class carries exact first and second derivative tables of r, the Levi
positivity constant c, the near-boundary threshold theta, and a real
bounding box for rejection sampling.  All geometric quantities used by the
rest of the library (gradient, complex Hessian, normal direction, boundary
projection, region samplers) come from here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._poly import HermPoly, norm_sq_poly, unit_vector

BOUNDARY_TOL_REL = 1e-10


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    """Strongly pseudo-convex domain {r < 0} with exact polynomial geometry.

    Attributes
    ----------
    n : complex dimension
    r : defining polynomial, real valued on C^n
    bounding_box : (2n, 2) array of [lo, hi] per real coordinate; contains
        the closure of the domain
    c : Levi form positivity constant on the boundary
    theta : near-boundary threshold; the Hessian stays >= c/2 and the
        gradient stays nonzero on {-r < 3*theta}
    tag : "ball", "ellipsoid" or "custom"
    """

    n: int
    r: HermPoly
    bounding_box: np.ndarray
    c: float
    theta: float
    tag: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.r.is_real():
            raise DomainError("defining polynomial is not real valued")
        object.__setattr__(self, "bounding_box", np.asarray(self.bounding_box, dtype=float))
        if self.bounding_box.shape != (2 * self.n, 2):
            raise DomainError("bounding_box must have shape (2n, 2)")

    # -- derivative tables ------------------------------------------------

    def _grad_polys(self) -> list[HermPoly]:
        if "dbar" not in self._cache:
            self._cache["dbar"] = [self.r.dbar(i) for i in range(self.n)]
        return self._cache["dbar"]

    def _hess_polys(self) -> list[list[HermPoly]]:
        # hess[i][j] = d_i dbar_j r
        if "hess" not in self._cache:
            dbars = self._grad_polys()
            self._cache["hess"] = [[dbars[j].d(i) for j in range(self.n)] for i in range(self.n)]
        return self._cache["hess"]

    def _holo_hess_polys(self) -> list[list[HermPoly]]:
        # hol[i][j] = d_i d_j r  (used by the gauge Taylor form)
        if "holhess" not in self._cache:
            ds = [self.r.d(i) for i in range(self.n)]
            self._cache["holhess"] = [[ds[j].d(i) for j in range(self.n)] for i in range(self.n)]
        return self._cache["holhess"]

    # -- pointwise geometry ------------------------------------------------

    def r_val(self, z: np.ndarray) -> np.ndarray:
        return np.real(self.r(z))

    def dbar_r(self, z: np.ndarray) -> np.ndarray:
        """(dbar_1 r, ..., dbar_n r) at z; shape (..., n)."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        for i, p in enumerate(self._grad_polys()):
            out[..., i] = p(z)
        return out

    def hessian(self, z: np.ndarray) -> np.ndarray:
        """Complex Hessian H with H[..., i, j] = (d_i dbar_j r)(z).

        The Levi quadratic form sum_{i,j} H[i,j] xi_i conj(xi_j) is evaluated
        by :func:`levi_form`.
        """
        z = np.asarray(z, dtype=complex)
        H = np.empty(z.shape[:-1] + (self.n, self.n), dtype=complex)
        polys = self._hess_polys()
        for i in range(self.n):
            for j in range(self.n):
                H[..., i, j] = polys[i][j](z)
        return H

    def grad_norm(self, z: np.ndarray) -> np.ndarray:
        """Euclidean norm of the real gradient of r; equals 2*|dbar r|."""
        return 2.0 * np.linalg.norm(self.dbar_r(z), axis=-1)

    def contains(self, z: np.ndarray) -> np.ndarray:
        return self.r_val(z) < 0

    @property
    def boundary_tol(self) -> float:
        return BOUNDARY_TOL_REL * self.box_diameter()

    def box_diameter(self) -> float:
        widths = self.bounding_box[:, 1] - self.bounding_box[:, 0]
        return float(np.linalg.norm(widths))

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "r": self.r.to_json_terms(),
            "bounding_box": self.bounding_box.tolist(),
            "theta": self.theta,
            "c": self.c,
            "tag": self.tag,
        }
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "DomainSpec":
        doc = json.loads(text)
        return DomainSpec(
            n=int(doc["n"]),
            r=HermPoly.from_json_terms(int(doc["n"]), doc["r"]),
            bounding_box=np.asarray(doc["bounding_box"], dtype=float),
            c=float(doc["c"]),
            theta=float(doc["theta"]),
            tag=str(doc["tag"]),
        )


def levi_form(H: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """sum_{i,j} H[i,j] xi_i conj(xi_j), real for Hermitian-symmetric H."""
    return np.real(np.einsum("...ij,...i,...j->...", H, xi, np.conj(xi)))


# -- constructors ------------------------------------------------------------


def unit_ball(n: int, theta: float = 0.25) -> DomainSpec:
    """{|z| < 1} with r = |z|^2 - 1."""
    r = HermPoly.from_terms(
        n, [(unit_vector(n, i), unit_vector(n, i), 1.0) for i in range(n)] + [((0,) * n, (0,) * n, -1.0)]
    )
    box = np.array([[-1.05, 1.05]] * (2 * n))
    return DomainSpec(n=n, r=r, bounding_box=box, c=2.0, theta=theta, tag="ball")


def ellipsoid(weights, theta: float = 0.125) -> DomainSpec:
    """{sum a_i |z_i|^2 < 1} for positive weights a_i."""
    weights = [float(w) for w in weights]
    if any(w <= 0 for w in weights):
        raise DomainError("ellipsoid weights must be positive")
    n = len(weights)
    terms = [(unit_vector(n, i), unit_vector(n, i), w) for i, w in enumerate(weights)] + [
        ((0,) * n, (0,) * n, -1.0)
    ]
    r = HermPoly.from_terms(n, terms)
    half = [1.05 / np.sqrt(w) for w in weights]
    box = np.array([[-h, h] for h in half for _ in (0, 1)])
    return DomainSpec(n=n, r=r, bounding_box=box, c=2.0 * min(weights), theta=theta, tag="ellipsoid")


def custom_domain(n: int, terms, bounding_box, c: float, theta: float) -> DomainSpec:
    r = HermPoly.from_terms(n, terms)
    return DomainSpec(n=n, r=r, bounding_box=np.asarray(bounding_box, float), c=c, theta=theta, tag="custom")


# -- operations ---------------------------------------------------------------


def eval_geometry(dom: DomainSpec, z: np.ndarray) -> dict:
    """Exact r, anti-holomorphic gradient, and complex Hessian at z."""
    z = np.asarray(z, dtype=complex)
    return {"r": float(dom.r_val(z)), "dbar_r": dom.dbar_r(z), "hessian": dom.hessian(z)}


def certify_pseudoconvexity(
    dom: DomainSpec,
    mesh_density: int = 4000,
    seed: int = 0,
    grad_tol: float = 1e-6,
) -> dict:
    """Sample {r > -3*theta} inside the box and check the two defining bounds.

    c_min is the smallest Hessian eigenvalue seen on the mesh; the
    certificate holds when c_min >= c/2 and the gradient norm stays above
    ``grad_tol`` relative to the box diameter.  A failing check reports the
    witnessing mesh point.
    """
    if mesh_density < 1:
        raise DomainError("mesh_density must be >= 1")
    rng = np.random.default_rng(seed)
    box = dom.bounding_box
    pts = []
    target = mesh_density
    attempts = 0
    while sum(len(p) for p in pts) < target and attempts < 200:
        raw = rng.uniform(box[:, 0], box[:, 1], size=(max(4 * target, 1024), 2 * dom.n))
        zz = raw[:, : dom.n] + 1j * raw[:, dom.n :]
        rv = dom.r_val(zz)
        keep = zz[(rv < 0) & (rv > -3.0 * dom.theta)]
        if keep.size:
            pts.append(keep)
        attempts += 1
    if not pts:
        return {"c_min": np.nan, "theta_ok": False, "witness": None, "note": "empty mesh"}
    mesh = np.concatenate(pts, axis=0)[:target]

    H = dom.hessian(mesh)
    eigs = np.linalg.eigvalsh(0.5 * (H + np.conj(np.swapaxes(H, -1, -2))))
    lam_min = eigs[:, 0]
    i_min = int(np.argmin(lam_min))
    c_min = float(lam_min[i_min])

    gn = dom.grad_norm(mesh)
    i_g = int(np.argmin(gn))
    grad_ok = bool(gn[i_g] > grad_tol * dom.box_diameter())
    hess_ok = bool(c_min >= dom.c / 2.0)

    witness = None
    if not hess_ok:
        witness = {"kind": "hessian", "z": mesh[i_min].tolist(), "lambda_min": c_min}
    elif not grad_ok:
        witness = {"kind": "gradient", "z": mesh[i_g].tolist(), "grad_norm": float(gn[i_g])}
    return {"c_min": c_min, "theta_ok": hess_ok and grad_ok, "witness": witness}


def select_theta(dom: DomainSpec, k_range=range(1, 12), mesh_density: int = 2000, seed: int = 0) -> float:
    """Largest theta = 2**-k whose certification passes; dyadic grid search."""
    for k in k_range:
        cand = DomainSpec(dom.n, dom.r, dom.bounding_box, dom.c, 2.0 ** (-k), dom.tag)
        res = certify_pseudoconvexity(cand, mesh_density=mesh_density, seed=seed)
        if res["theta_ok"]:
            return 2.0 ** (-k)
    raise DomainError("no dyadic theta in range passes certification")


def normal_direction(dom: DomainSpec, z: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unit outward-tilted direction dbar r / |dbar r| at z."""
    g = dom.dbar_r(z)
    nrm = np.linalg.norm(g, axis=-1, keepdims=True)
    if np.any(nrm < tol):
        raise DomainError("gradient below tolerance; point outside the guaranteed collar")
    return g / nrm


def boundary_project(dom: DomainSpec, z: np.ndarray, max_iter: int = 80) -> np.ndarray:
    """First root of t -> r(z + t*u_z) with t >= 0, by safeguarded Newton.

    Returns a boundary point p with |r(p)| <= boundary_tol.  The fitted
    proportionality |z - p| <= C_p |r(z)| is audited by the caller; no
    continuity in z is promised.
    """
    z = np.asarray(z, dtype=complex)
    rz = dom.r_val(z)
    if rz >= 0:
        if abs(rz) <= dom.boundary_tol:
            return z
        raise DomainError("point lies outside the closed domain")
    u = normal_direction(dom, z)

    # bracket the root along the ray
    t_hi = 0.0
    step = max(-rz, 1e-6) / max(dom.grad_norm(z) / 2.0, 1e-12)
    for _ in range(200):
        t_hi += step
        if dom.r_val(z + t_hi * u) >= 0:
            break
        step *= 1.5
    else:
        raise DomainError("boundary bracket not found along the normal ray")
    t_lo = 0.0
    t = t_hi
    for _ in range(max_iter):
        p = z + t * u
        val = dom.r_val(p)
        if abs(val) <= dom.boundary_tol:
            return p
        if val > 0:
            t_hi = t
        else:
            t_lo = t
        dval = 2.0 * np.real(np.vdot(dom.dbar_r(p), u))
        t_new = t - val / dval if dval > 1e-14 else 0.5 * (t_lo + t_hi)
        if not (t_lo < t_new < t_hi):
            t_new = 0.5 * (t_lo + t_hi)
        t = t_new
    raise DomainError("boundary projection did not converge")


def fit_projection_constant(dom: DomainSpec, count: int = 200, seed: int = 0, depth: float = 0.25) -> float:
    """Fitted C_p with |z - p(z)| <= C_p |r(z)| over a sampled collar."""
    pts = sample_region(dom, ("shell", 1e-4, depth), count, seed)
    ratios = []
    for z in pts:
        p = boundary_project(dom, z)
        ratios.append(np.linalg.norm(p - z) / abs(dom.r_val(z)))
    return float(np.max(ratios))


def sample_region(dom: DomainSpec, region, count: int, seed: int = 0) -> np.ndarray:
    """Rejection / projection sampler for the standard regions.

    region is one of
      "interior"            : {r < 0}
      ("shell", t1, t2)     : {t1 <= -r <= t2}
      "boundary"            : {r = 0} within boundary_tol (surface measure
                              weighted; see :func:`surface_sample`)
      ("surface", rho)      : {-r = rho} likewise

    Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    if region == "boundary":
        return surface_sample(dom, 0.0, count, rng)[0]
    if isinstance(region, tuple) and region[0] == "surface":
        return surface_sample(dom, float(region[1]), count, rng)[0]

    if region == "interior":
        def keep(rv):
            return rv < 0
    elif isinstance(region, tuple) and region[0] == "shell":
        t1, t2 = float(region[1]), float(region[2])
        if not (0 <= t1 <= t2):
            raise DomainError("shell bounds must satisfy 0 <= t1 <= t2")

        def keep(rv):
            return (-rv >= t1) & (-rv <= t2)
    else:
        raise DomainError(f"unknown region {region!r}")

    box = dom.bounding_box
    out = []
    got = 0
    for _ in range(400):
        m = max(4 * count, 4096)
        raw = rng.uniform(box[:, 0], box[:, 1], size=(m, 2 * dom.n))
        zz = raw[:, : dom.n] + 1j * raw[:, dom.n :]
        sel = zz[keep(dom.r_val(zz))]
        if sel.size:
            out.append(sel)
            got += len(sel)
        if got >= count:
            break
    if got < count:
        raise DomainError("acceptance rate too low for region sampling")
    return np.concatenate(out, axis=0)[:count]


def surface_sample(
    dom: DomainSpec,
    rho: float,
    count: int,
    rng: np.random.Generator,
    slab_eps: Optional[float] = None,
) -> tuple[np.ndarray, float]:
    """Approximately uniform samples of the level surface {-r = rho}.

    Thin-slab rejection plus Newton projection onto the level set; the
    co-area density 1/|grad r| is undone by gradient-weighted thinning, so
    the retained points are uniform for the surface measure up to O(eps).
    Returns (points, total_surface_area_estimate).
    """
    if slab_eps is None:
        slab_eps = 5e-4 * dom.box_diameter()
    box = dom.bounding_box
    grad_cap = _grad_cap(dom, rng)
    pts = []
    n_drawn = 0
    n_in_slab = 0
    grad_sum = 0.0
    for _ in range(600):
        m = max(8 * count, 8192)
        raw = rng.uniform(box[:, 0], box[:, 1], size=(m, 2 * dom.n))
        zz = raw[:, : dom.n] + 1j * raw[:, dom.n :]
        n_drawn += m
        rv = dom.r_val(zz)
        sel = np.abs(-rv - rho) < slab_eps
        cand = zz[sel]
        n_in_slab += len(cand)
        if len(cand) == 0:
            continue
        gn = dom.grad_norm(cand)
        grad_sum += float(np.sum(gn))
        # thin by |grad r| to convert the co-area density into surface-uniform
        acc = rng.uniform(0, grad_cap, size=len(cand)) < gn
        cand = cand[acc]
        if len(cand) == 0:
            continue
        proj = _project_to_level(dom, cand, rho)
        pts.append(proj)
        if sum(len(p) for p in pts) >= count:
            break
    if not pts or sum(len(p) for p in pts) < count:
        raise DomainError("surface sampler starved; enlarge slab_eps or count")
    mean_grad = grad_sum / max(n_in_slab, 1)
    box_vol = float(np.prod(box[:, 1] - box[:, 0]))
    slab_vol = box_vol * n_in_slab / n_drawn
    area = slab_vol * mean_grad / (2.0 * slab_eps)
    all_pts = np.concatenate(pts, axis=0)[:count]
    return all_pts, float(area)


def _grad_cap(dom: DomainSpec, rng: np.random.Generator) -> float:
    """Upper bound for |grad r| over the box, from a coarse probe."""
    box = dom.bounding_box
    raw = rng.uniform(box[:, 0], box[:, 1], size=(2048, 2 * dom.n))
    zz = raw[:, : dom.n] + 1j * raw[:, dom.n :]
    corners = box[:, 1][None, :]
    zc = corners[:, : dom.n] + 1j * corners[:, dom.n :]
    probe = np.concatenate([zz, zc], axis=0)
    return 1.5 * float(np.max(dom.grad_norm(probe)))


def _project_to_level(dom: DomainSpec, pts: np.ndarray, rho: float, iters: int = 40) -> np.ndarray:
    """Newton along the gradient direction onto {-r = rho}, vectorized."""
    z = np.array(pts, dtype=complex)
    for _ in range(iters):
        val = dom.r_val(z) + rho
        if np.all(np.abs(val) <= dom.boundary_tol):
            break
        g = dom.dbar_r(z)
        gn2 = np.sum(np.abs(g) ** 2, axis=-1)
        # real-gradient Newton step: dr along direction g/|g| is 2|g|
        step = val / np.maximum(2.0 * gn2, 1e-30)
        z = z - step[:, None] * g
    return z


def surface_area(dom: DomainSpec, rho: float, seed: int = 0, count: int = 4096) -> float:
    rng = np.random.default_rng(seed)
    _, area = surface_sample(dom, rho, count, rng)
    return area
