"""Polynomial pseudo partial waves with overlap-preserving (unitary PAW) constraints.

Inside the augmentation radius each channel is ``R~(r) = sum_p c_p (r^2)^(K-1-p)``
with ``K = P + M``; outside it equals the all-electron function. Constraints:

* derivatives ``0..P-1`` of ``R~`` and ``R`` agree at ``r_a`` (linear in c),
* ``int_0^{r_a} r^(2+2l) (R~_i R~_j - R_i R_j) dr = 0`` for every pair of
  channels with the same ``l`` (bilinear in c).

The linear constraints are eliminated through a null-space basis; the overlap
equations are solved by damped Gauss-Newton with minimum-norm steps starting
from the least-squares fit of the polynomial to the all-electron data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import null_space
from scipy.optimize import minimize

DEFAULT_TOL = 1e-8


@dataclass
class RadialFunction:
    """Radial part ``R(r)`` of a partial wave ``r^l R(r) Y_lm``."""

    grid: np.ndarray
    values: np.ndarray
    l: int = 0

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("radial grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("radial values must be finite")
        if self.l < 0:
            raise ValueError("l must be >= 0")


@dataclass
class PseudoRadialSetup:
    r_a: float
    P: int
    M: int
    ls: list
    coefficients: list
    residuals: dict
    overlap_diff: np.ndarray = field(repr=False)
    g_max: float | None = None

    @property
    def K(self) -> int:
        return self.P + self.M

    def powers(self) -> np.ndarray:
        """Exponents of ``r`` multiplying ``c_p``."""
        return 2 * np.arange(self.K - 1, -1, -1)

    def inner(self, i: int, r, deriv: int = 0) -> np.ndarray:
        """``d^k/dr^k`` of the polynomial of channel ``i``."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c, e in zip(self.coefficients[i], self.powers()):
            if e < deriv:
                continue
            fac = math.perm(int(e), deriv)
            out = out + c * fac * r ** (e - deriv)
        return out

    def evaluate(self, i: int, r, ae: RadialFunction) -> np.ndarray:
        """Piecewise pseudo function: polynomial below ``r_a``, ``ae`` from ``r_a`` on."""
        r = np.asarray(r, dtype=float)
        out = np.asarray(CubicSpline(ae.grid, ae.values)(r), dtype=float)
        exact = np.isin(r, ae.grid)
        out[exact] = ae.values[np.searchsorted(ae.grid, r[exact])]
        inside = r < self.r_a
        out[inside] = self.inner(i, r[inside])
        return out


class FitError(RuntimeError):
    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals


# --- numerical pieces --------------------------------------------------------

def _local_poly(grid, values, r0, n_points=41, degree=10):
    """Local polynomial around ``r0``; returns (coefs in t=(r-r0)/s, s)."""
    idx = np.argsort(np.abs(grid - r0), kind="stable")[: min(n_points, len(grid))]
    idx.sort()
    r = grid[idx]
    s = float(np.max(np.abs(r - r0))) or 1.0
    deg = min(degree, len(idx) - 1)
    coef = np.polynomial.polynomial.polyfit((r - r0) / s, values[idx], deg)
    return coef, s


def boundary_derivatives(ae: RadialFunction, r_a: float, n: int) -> np.ndarray:
    """Derivatives ``0..n-1`` of the all-electron function at ``r_a``."""
    coef, s = _local_poly(ae.grid, ae.values, r_a)
    return np.array([math.factorial(k) * coef[k] / s**k if k < len(coef) else 0.0 for k in range(n)])


def radial_integral(grid, values, r_a: float) -> float:
    """``int_0^{r_a} values dr`` by Simpson up to the last node plus a local-polynomial tail."""
    k = int(np.searchsorted(grid, r_a, side="right"))
    if k < 2:
        raise ValueError("augmentation radius leaves fewer than two grid points inside")
    total = float(simpson(values[:k], x=grid[:k]))
    last = grid[k - 1]
    if r_a > last:
        coef, s = _local_poly(grid, values, r_a)
        x, w = np.polynomial.legendre.leggauss(12)
        t = 0.5 * (r_a - last) * x + 0.5 * (r_a + last)
        vals = np.polynomial.polynomial.polyval((t - r_a) / s, coef)
        total += 0.5 * (r_a - last) * float(np.dot(w, vals))
    if grid[0] > 0:
        coef, s = _local_poly(grid, values, grid[0])
        x, w = np.polynomial.legendre.leggauss(12)
        t = 0.5 * grid[0] * (x + 1)
        total += 0.5 * grid[0] * float(np.dot(w, np.polynomial.polynomial.polyval((t - grid[0]) / s, coef)))
    return total


def ae_overlaps(channels, r_a: float) -> np.ndarray:
    n = len(channels)
    S = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            if channels[i].l != channels[j].l:
                continue
            g = channels[i].grid
            vals = g ** (2 + 2 * channels[i].l) * channels[i].values * np.interp(g, channels[j].grid, channels[j].values)
            S[i, j] = S[j, i] = radial_integral(g, vals, r_a)
    return S


def _gram(K: int, l: int) -> np.ndarray:
    """``int_0^1 x^(2+2l) x^(e_p + e_q) dx`` for scaled exponents ``e = 2(K-1-p)``."""
    e = 2 * np.arange(K - 1, -1, -1)
    return 1.0 / (3 + 2 * l + e[:, None] + e[None, :])


def _derivative_rows(K: int, P: int, r_a: float) -> np.ndarray:
    """Rows mapping scaled coefficients to physical derivatives at ``r_a``."""
    e = 2 * np.arange(K - 1, -1, -1)
    A = np.zeros((P, K))
    for k in range(P):
        for p in range(K):
            if e[p] >= k:
                A[k, p] = math.perm(int(e[p]), k) * r_a ** (-k)
    return A


class _Problem:
    """Reduced unknowns ``z``: scaled coefficients ``c~_i = c0_i + N z_i``."""

    def __init__(self, channels, r_a, P, M):
        self.channels = channels
        self.r_a = r_a
        self.P, self.M, self.K = P, M, P + M
        A = _derivative_rows(self.K, P, r_a)
        self.N = null_space(A)
        if self.N.shape[1] != M:
            raise ValueError("boundary constraints are rank deficient")
        self.c0 = []
        for ch in channels:
            d = boundary_derivatives(ch, r_a, P)
            self.c0.append(np.linalg.lstsq(A, d, rcond=None)[0])
        self.gram = {l: _gram(self.K, l) for l in {ch.l for ch in channels}}
        S = ae_overlaps(channels, r_a)
        self.pairs = [(i, j) for i in range(len(channels)) for j in range(i, len(channels)) if channels[i].l == channels[j].l]
        # overlaps in scaled units: int_0^{r_a} = r_a^(3+2l) int_0^1
        self.target = np.array([S[i, j] / r_a ** (3 + 2 * channels[i].l) for i, j in self.pairs])
        self.S = S

    def coeffs(self, z) -> list:
        z = np.asarray(z).reshape(len(self.channels), self.M)
        return [c0 + self.N @ zi for c0, zi in zip(self.c0, z)]

    def residual(self, z) -> np.ndarray:
        c = self.coeffs(z)
        return np.array([c[i] @ self.gram[self.channels[i].l] @ c[j] for i, j in self.pairs]) - self.target

    def jacobian(self, z) -> np.ndarray:
        c = self.coeffs(z)
        J = np.zeros((len(self.pairs), len(self.channels) * self.M))
        for row, (i, j) in enumerate(self.pairs):
            G = self.gram[self.channels[i].l]
            J[row, i * self.M:(i + 1) * self.M] += (G @ c[j]) @ self.N
            J[row, j * self.M:(j + 1) * self.M] += (G @ c[i]) @ self.N
        return J

    def initial(self) -> np.ndarray:
        z = []
        e = 2 * np.arange(self.K - 1, -1, -1)
        for ch, c0 in zip(self.channels, self.c0):
            m = ch.grid <= self.r_a
            x = ch.grid[m] / self.r_a
            V = x[:, None] ** e[None, :]
            z.append(np.linalg.lstsq(V @ self.N, ch.values[m] - V @ c0, rcond=None)[0])
        return np.concatenate(z)

    def physical(self, z) -> list:
        scale = self.r_a ** (-2.0 * np.arange(self.K - 1, -1, -1))
        return [c * scale for c in self.coeffs(z)]


def _gauss_newton(prob: _Problem, z, tol, max_iter=200):
    f = prob.residual(z)
    for _ in range(max_iter):
        if np.abs(f).max(initial=0.0) <= 1e-3 * tol:
            break
        step = np.linalg.lstsq(prob.jacobian(z), -f, rcond=None)[0]
        t, norm = 1.0, np.linalg.norm(f)
        while t > 1e-8:
            trial = z + t * step
            ft = prob.residual(trial)
            if np.linalg.norm(ft) < norm:
                z, f = trial, ft
                break
            t *= 0.5
        else:
            break
    return z, f


def _bessel_tables(channels, r_a, g_max, n_g=400):
    g_hi = 4.0 * g_max
    x, w = np.polynomial.legendre.leggauss(n_g)
    G = 0.5 * (g_hi - g_max) * x + 0.5 * (g_hi + g_max)
    wG = 0.5 * (g_hi - g_max) * w * G**4
    return G, wG


def _j0(x):
    return np.sinc(x / np.pi)


def _fourier_parts(prob: _Problem, G, ch_index):
    """``b(G) = 4 pi int r^2 j0(G r) r R~(r) dr`` split as ``B c~ + b_out``."""
    ch = prob.channels[ch_index]
    xr, wr = np.polynomial.legendre.leggauss(80)
    r = 0.5 * prob.r_a * (xr + 1)
    wr = 0.5 * prob.r_a * wr
    e = 2 * np.arange(prob.K - 1, -1, -1)
    basis = (r / prob.r_a)[:, None] ** e[None, :]
    B = 4 * np.pi * (_j0(G[:, None] * r[None, :]) * (wr * r**3)[None, :]) @ basis
    out = ch.grid >= prob.r_a
    ro = ch.grid[out]
    vals = ro**3 * ch.values[out]
    b_out = 4 * np.pi * simpson(_j0(G[:, None] * ro[None, :]) * vals[None, :], x=ro, axis=1)
    return B, b_out


def fourier_tail(setup: PseudoRadialSetup, channels, g_max: float) -> float:
    """``sum_i int_{G > G_max} G^2 |b_i(G)|^2 G^2 dG`` for the l = 0 channels."""
    prob = _Problem(channels, setup.r_a, setup.P, setup.M)
    G, wG = _bessel_tables(channels, setup.r_a, g_max)
    total = 0.0
    scale = setup.r_a ** (2.0 * np.arange(setup.K - 1, -1, -1))
    for i, ch in enumerate(channels):
        if ch.l != 0:
            continue
        B, b_out = _fourier_parts(prob, G, i)
        b = B @ (np.asarray(setup.coefficients[i]) * scale) + b_out
        total += float(np.dot(wG, b**2))
    return total


def fit_pseudo_radial(channels, r_a: float, P: int, M: int, g_max: float | None = None, tol: float = DEFAULT_TOL) -> PseudoRadialSetup:
    """Fit polynomial pseudo partial waves for ``channels`` sharing ``r_a``."""
    channels = list(channels)
    if not channels:
        raise ValueError("need at least one channel")
    if P < 1 or M < 0:
        raise ValueError("need P >= 1 and M >= 0")
    for ch in channels:
        if not ch.grid[0] < r_a < ch.grid[-1]:
            raise ValueError(f"r_a={r_a} lies outside the radial grid [{ch.grid[0]}, {ch.grid[-1]}]")
    prob = _Problem(channels, r_a, P, M)
    z, f = _gauss_newton(prob, prob.initial(), tol)
    if g_max is not None and M > 0:
        G, wG = _bessel_tables(channels, r_a, g_max)
        parts = [_fourier_parts(prob, G, i) if ch.l == 0 else None for i, ch in enumerate(channels)]
        # quadratic objective in z, normalized by its starting value
        def objective(zz):
            c = prob.coeffs(zz)
            val, grad = 0.0, np.zeros_like(zz)
            for i, part in enumerate(parts):
                if part is None:
                    continue
                B, b_out = part
                b = B @ c[i] + b_out
                val += float(np.dot(wG, b**2))
                grad[i * M:(i + 1) * M] = 2 * ((wG * b) @ B) @ prob.N
            return val, grad

        v0 = max(objective(z)[0], 1e-300)
        res = minimize(
            lambda zz: tuple(x / v0 for x in objective(zz)),
            z,
            jac=True,
            method="SLSQP",
            constraints=[{"type": "eq", "fun": prob.residual, "jac": prob.jacobian}],
            options={"maxiter": 500, "ftol": 1e-14},
        )
        z2, f2 = _gauss_newton(prob, res.x, tol)
        if np.abs(f2).max(initial=0.0) <= tol and objective(z2)[0] < objective(z)[0]:
            z, f = z2, f2
    c = prob.physical(z)
    setup = PseudoRadialSetup(r_a, P, M, [ch.l for ch in channels], c, {}, np.zeros((len(channels),) * 2), g_max)
    report = _residuals(setup, channels, prob.S)
    setup.residuals = report["residuals"]
    setup.overlap_diff = report["overlap_diff"]
    worst = max(setup.residuals.values())
    if worst > tol:
        raise FitError(f"constraint solver stagnated: max residual {worst:.3e} > {tol:.1e}", setup.residuals)
    return setup


def _residuals(setup: PseudoRadialSetup, channels, S_ae) -> dict:
    n = len(channels)
    O = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            if channels[i].l != channels[j].l:
                continue
            G = _gram(setup.K, channels[i].l) * setup.r_a ** (3 + 2 * channels[i].l)
            scale = setup.r_a ** (2.0 * np.arange(setup.K - 1, -1, -1))
            ci = np.asarray(setup.coefficients[i]) * scale
            cj = np.asarray(setup.coefficients[j]) * scale
            O[i, j] = O[j, i] = ci @ G @ cj - S_ae[i, j]
    res = {"overlap": float(np.abs(O).max(initial=0.0)), "outside": 0.0}
    for i, ch in enumerate(channels):
        d_ae = boundary_derivatives(ch, setup.r_a, setup.P)
        d_ps = np.array([setup.inner(i, np.array([setup.r_a]), k)[0] for k in range(setup.P)])
        res[f"boundary_{i}"] = float(np.abs(d_ae - d_ps).max())
    return {"residuals": res, "overlap_diff": O}


def refine_grid(ae: RadialFunction) -> RadialFunction:
    """Insert midpoints; new values from a cubic spline through the old data."""
    mid = 0.5 * (ae.grid[1:] + ae.grid[:-1])
    grid = np.empty(2 * len(ae.grid) - 1)
    grid[0::2], grid[1::2] = ae.grid, mid
    values = np.empty_like(grid)
    values[0::2] = ae.values
    values[1::2] = CubicSpline(ae.grid, ae.values)(mid)
    return RadialFunction(grid, values, ae.l)


def verify_setup(setup: PseudoRadialSetup, channels, tol: float = DEFAULT_TOL) -> dict:
    """Recompute all constraint residuals on a midpoint-refined grid."""
    fine = [refine_grid(ch) for ch in channels]
    n = len(fine)
    O = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            if fine[i].l != fine[j].l:
                continue
            g = fine[i].grid
            w = g ** (2 + 2 * fine[i].l)
            ps = setup.inner(i, g) * setup.inner(j, g)
            ae = fine[i].values * np.interp(g, fine[j].grid, fine[j].values)
            O[i, j] = O[j, i] = radial_integral(g, w * ps, setup.r_a) - radial_integral(g, w * ae, setup.r_a)
    checks = {"overlap": float(np.abs(O).max(initial=0.0))}
    for i, ch in enumerate(fine):
        d_ae = boundary_derivatives(ch, setup.r_a, setup.P)
        d_ps = np.array([setup.inner(i, np.array([setup.r_a]), k)[0] for k in range(setup.P)])
        checks[f"boundary_{i}"] = float(np.abs(d_ae - d_ps).max())
        out = ch.grid >= setup.r_a
        checks[f"outside_{i}"] = float(np.abs(setup.evaluate(i, ch.grid[out], ch) - ch.values[out]).max(initial=0.0))
    return {
        "checks": checks,
        "passed": {k: v <= tol for k, v in checks.items()},
        "ok": all(v <= tol for v in checks.values()),
        "overlap_diff": O,
    }


def hydrogenic_channels(r_max: float = 20.0, n_points: int = 20001) -> list:
    """Unnormalized hydrogen 1s and 2s radial functions on a uniform grid."""
    r = np.linspace(0.0, r_max, n_points)
    return [RadialFunction(r, np.exp(-r), 0), RadialFunction(r, (1 - r / 2) * np.exp(-r / 2), 0)]
