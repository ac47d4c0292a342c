"""Reproducing kernels: exact on the ball, leading-order elsewhere.

The exact mode evaluates n!/pi^n (1 - <z,w>)^{-(n+1)} on the unit ball.
The leading mode evaluates C |grad r(w)|^2 det L(w) X(z,w)^{-(n+1)} with L
the restriction of the complex Hessian to the complex tangent space and C
calibrated once per dimension against the exact ball kernel near the
boundary; it is only trusted on the near-diagonal region where the Taylor
remainder X is comparable to the scale F.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, pi

import numpy as np
from scipy.special import roots_jacobi

from .domain import DomainSpec
from .gauge import comparability_scale, taylor_remainder


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelMode:
    tag: str  # "exact-ball" | "fefferman-leading"
    near_diag_delta: float = 0.35
    x_floor: float = 1e-3

    def __post_init__(self):
        if self.tag not in ("exact-ball", "fefferman-leading"):
            raise KernelError(f"unknown kernel mode {self.tag!r}")


EXACT_BALL = KernelMode("exact-ball")
FEFFERMAN = KernelMode("fefferman-leading")


def hermitian_inner(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """<z, w> linear in the first slot."""
    return np.einsum("...i,...i->...", z, np.conj(w))


def _check_exact_ball(dom: DomainSpec):
    if dom.tag != "ball":
        raise KernelError("exact mode is only valid on the unit ball")


def kernel_eval(dom: DomainSpec, mode: KernelMode, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """K(z, w), vectorized over the leading axes of w."""
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    if mode.tag == "exact-ball":
        _check_exact_ball(dom)
        n = dom.n
        return factorial(n) / pi**n * (1.0 - hermitian_inner(z, w)) ** (-(n + 1))
    # leading mode
    F = comparability_scale(dom, z.reshape(-1), w)
    rz = abs(float(dom.r_val(z)))
    rw = np.abs(dom.r_val(w))
    gap = np.linalg.norm(np.conj(w) - np.conj(z.reshape(-1)), axis=-1)
    if np.any(rz + rw + gap >= mode.near_diag_delta):
        raise KernelError("leading-term mode requested outside its near-diagonal region")
    X = taylor_remainder(dom, z, w)
    if np.any(np.abs(X) < mode.x_floor * F):
        raise KernelError("Taylor denominator too close to zero for the leading term")
    C = leading_constant(dom.n)
    grad2 = dom.grad_norm(w) ** 2
    detL = tangential_hessian_det(dom, w)
    return C * grad2 * detL * X ** (-(dom.n + 1))


def tangential_hessian_det(dom: DomainSpec, w: np.ndarray) -> np.ndarray:
    """det of the complex Hessian restricted to the complex tangent space at w."""
    w = np.asarray(w, complex)
    if dom.n == 1:
        return np.ones(w.shape[:-1])
    H = dom.hessian(w)
    g = dom.dbar_r(w)
    flat_w = w.reshape(-1, dom.n)
    flat_H = H.reshape(-1, dom.n, dom.n)
    flat_g = g.reshape(-1, dom.n)
    out = np.empty(len(flat_w))
    for i in range(len(flat_w)):
        e = flat_g[i] / np.linalg.norm(flat_g[i])
        basis = _tangent_basis(e)
        # quadratic form sum H[i,j] xi_i conj(xi_j) restricted to the basis
        L = np.einsum("ij,ai,bj->ab", flat_H[i], basis, np.conj(basis))
        out[i] = float(np.real(np.linalg.det(L)))
    return out.reshape(w.shape[:-1])


def _tangent_basis(e: np.ndarray) -> np.ndarray:
    n = len(e)
    proj = np.eye(n, dtype=complex) - np.outer(e, np.conj(e))
    q, _ = np.linalg.qr(proj)
    cols = [q[:, i] for i in range(n) if abs(np.vdot(e, q[:, i])) < 1e-8]
    return np.array(cols[: n - 1])


_LEADING_CONST: dict[int, float] = {}


def leading_constant(n: int) -> float:
    """Dimensional constant of the leading term, calibrated on the ball.

    One near-boundary diagonal point of the unit ball pins it down; the
    result is cached per dimension.
    """
    if n not in _LEADING_CONST:
        from .domain import unit_ball

        ball = unit_ball(n)
        z = np.zeros(n, complex)
        z[0] = np.sqrt(1 - 1e-3)
        exact = factorial(n) / pi**n * (1.0 - hermitian_inner(z, z)) ** (-(n + 1))
        X = taylor_remainder(ball, z, z.reshape(1, -1))[0]
        grad2 = float(ball.grad_norm(z) ** 2)
        detL = float(tangential_hessian_det(ball, z.reshape(1, -1))[0])
        _LEADING_CONST[n] = float(np.real(exact / (grad2 * detL * X ** (-(n + 1)))))
    return _LEADING_CONST[n]


# -- quadrature on the ball ------------------------------------------------------


@dataclass(frozen=True)
class BallQuadrature:
    """Product rule on the unit ball exact for monomials z^a conj(z)^b.

    Radial part: modulus-squared simplex coordinates via iterated
    Gauss-Jacobi; angular part: uniform grids on each torus factor.  Exact
    when max(|a|, |b|) <= degree.
    """

    n: int
    degree: int
    nodes: np.ndarray  # (m, n) complex
    weights: np.ndarray  # (m,)

    @staticmethod
    def build(n: int, degree: int, angular_order: int | None = None) -> "BallQuadrature":
        q = degree + 2
        m_ang = 2 * degree + 3 if angular_order is None else int(angular_order)
        # simplex factors: t_1 = x_1, t_2 = (1-x_1) x_2, ... with Jacobi weights
        xs, ws = [], []
        for i in range(n):
            alpha = n - 1 - i  # remaining (1-x)^alpha factor from the map
            xj, wj = roots_jacobi(q, alpha, 0.0)
            xs.append(0.5 * (xj + 1.0))
            ws.append(wj * 0.5 ** (alpha + 1))
        grids = np.meshgrid(*xs, indexing="ij")
        wgrids = np.meshgrid(*ws, indexing="ij")
        t = []
        rem = np.ones_like(grids[0])
        for i in range(n):
            t.append(rem * grids[i])
            rem = rem * (1.0 - grids[i])
        radial_w = np.ones_like(grids[0])
        for i in range(n):
            radial_w = radial_w * wgrids[i]
        t = [ti.ravel() for ti in t]
        radial_w = radial_w.ravel()

        angles = 2.0 * pi * np.arange(m_ang) / m_ang
        ang_grids = np.meshgrid(*([angles] * n), indexing="ij")
        phases = [np.exp(1j * g.ravel()) for g in ang_grids]

        nodes = np.empty((len(radial_w) * len(phases[0]), n), complex)
        weights = np.empty(len(radial_w) * len(phases[0]))
        idx = 0
        block = len(phases[0])
        for j in range(len(radial_w)):
            amp = np.sqrt(np.asarray([t[i][j] for i in range(n)]))
            for i in range(n):
                nodes[idx : idx + block, i] = amp[i] * phases[i]
            weights[idx : idx + block] = pi**n * radial_w[j] / block
            idx += block
        return BallQuadrature(n, degree, nodes, weights)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(values * self.weights))


_QUAD_CACHE: dict[tuple[int, int, int | None], BallQuadrature] = {}


def ball_quadrature(n: int, degree: int, angular_order: int | None = None) -> BallQuadrature:
    key = (n, degree, angular_order)
    if key not in _QUAD_CACHE:
        _QUAD_CACHE[key] = BallQuadrature.build(n, degree, angular_order)
    return _QUAD_CACHE[key]


def monomial_norm_sq(n: int, alpha) -> float:
    """Closed-form squared L^2(ball) norm of z^alpha: pi^n alpha!/(n+|alpha|)!."""
    alpha = tuple(int(a) for a in alpha)
    num = pi**n
    for a in alpha:
        num *= factorial(a)
    return num / factorial(n + sum(alpha))


# -- derived objects -------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedKernel:
    """Unit-norm reproducing kernel at a center, with on-demand values."""

    dom: DomainSpec
    mode: KernelMode
    center: np.ndarray
    norm: float  # ||K_center|| = sqrt(K(center, center))

    def __call__(self, w: np.ndarray) -> np.ndarray:
        vals = kernel_eval(self.dom, self.mode, np.asarray(w, complex), self.center)
        return np.conj(vals) / self.norm  # K_z(w) = K(w, z) = conj(K(z, w))


def normalized_kernel(dom: DomainSpec, mode: KernelMode, z: np.ndarray) -> NormalizedKernel:
    z = np.asarray(z, complex).reshape(-1)
    kzz = kernel_eval(dom, mode, z, z.reshape(1, -1))[0]
    if np.real(kzz) <= 0:
        raise KernelError("diagonal kernel value not positive; wrong mode for this point")
    return NormalizedKernel(dom, mode, z, float(np.sqrt(np.real(kzz))))


def reproducing_residual(dom: DomainSpec, coeffs: dict, z: np.ndarray, degree: int | None = None) -> float:
    """|h(z) - quadrature<h, K_z>| for a polynomial h given by monomial coeffs.

    ``coeffs`` maps multi-indices to complex coefficients.  Exact-ball mode
    only; the quadrature degree covers the polynomial against the kernel's
    effective degree at the requested depth.
    """
    _check_exact_ball(dom)
    z = np.asarray(z, complex).reshape(-1)
    deg_h = max((sum(a) for a in coeffs), default=0)
    if degree is None:
        # the kernel's monomial coefficients decay like |z|^k; cover the
        # series down to 1e-12 relative
        zmax = min(float(np.linalg.norm(z)), 1.0 - 1e-9)
        tail = 30.0 / max(-np.log(max(zmax, 0.1)), 1e-9)
        degree = deg_h + int(np.ceil(tail)) + 8
    quad = ball_quadrature(dom.n, degree)

    def h_vals(pts):
        out = np.zeros(len(pts), complex)
        for a, c in coeffs.items():
            term = np.full(len(pts), complex(c))
            for i, ai in enumerate(a):
                if ai:
                    term = term * pts[:, i] ** ai
            out += term
        return out

    kz = kernel_eval(dom, EXACT_BALL, z, quad.nodes)  # K(z, w_q)
    integral = quad.integrate(h_vals(quad.nodes) * kz)
    hz = complex(h_vals(z.reshape(1, -1))[0])
    return abs(hz - integral)
