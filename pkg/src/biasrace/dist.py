"""The limiting distribution of the normalized residue/non-residue race.

X = mean + sum_j r_j cos(theta_j) with independent uniform phases, one term per
positive zero, plus an optional Gaussian standing in for the zeros above the
search height (its variance is known exactly from the closed-form zero sum).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import ndtr

from .arith import as_modulus
from .bessel import bessel_product, log_j0_taylor_constant
from .characters import enumerate_real_characters
from .lfunc import AccuracyError, LFunction
from .zeros import DEFAULT_HEIGHT, ZeroSet, cached_zeros

# |log J0(x) + x^2/4| <= 0.07 x^4 holds for 0 <= x <= 2.34 (measured; see tests)
_TAYLOR_XMAX = 2.34
_J0_FIRST_ZERO = 2.404825557695773


class MissingZerosError(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class RaceModel:
    mean: float
    amplitudes: np.ndarray = field(repr=False)
    tail_variance: float = 0.0
    tail_r4: float = 0.0  # estimated sum of r^4 over the zeros represented by the Gaussian
    tail_rmax: float = 0.0  # largest amplitude among those zeros
    q: int | None = None
    height: float | None = None
    provenance: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        r = np.ascontiguousarray(np.asarray(self.amplitudes, dtype=float))
        if r.size and np.any(r <= 0):
            raise ValueError("amplitudes must be positive")
        r.setflags(write=False)
        object.__setattr__(self, "amplitudes", r)
        if self.tail_variance < 0:
            raise ValueError("negative tail variance")

    @property
    def truncated_variance(self) -> float:
        return float(np.sum(self.amplitudes**2) / 2)

    @property
    def variance(self) -> float:
        return self.truncated_variance + self.tail_variance

    @property
    def n_terms(self) -> int:
        return len(self.amplitudes)

    def centered(self) -> "RaceModel":
        return RaceModel(0.0, self.amplitudes, self.tail_variance, self.tail_r4, self.tail_rmax,
                         self.q, self.height, dict(self.provenance))

    def without_tail(self) -> "RaceModel":
        return RaceModel(self.mean, self.amplitudes, 0.0, 0.0, 0.0, self.q, self.height, dict(self.provenance))


def _tail_r4(coef: float, k: int, T: float) -> float:
    """sum over zeros above T of (2c)^4/gamma^4 with the density log(kt/2pi)/2pi."""
    L = math.log(max(k * T / (2 * math.pi), math.e))
    return 16 * coef**4 / (2 * math.pi) * (L / (3 * T**3) + 1 / (9 * T**3))


def character_contribution(lf: LFunction, zs: ZeroSet, coef: float = 1.0, closed: float | None = None) -> dict:
    """Amplitudes and tail data of one character with weight |coef| in the race."""
    g = zs.gammas
    amps = 2 * abs(coef) / np.sqrt(0.25 + g * g)
    if closed is None:
        closed = lf.zero_sum_closed_form()
    trunc = float(np.sum(1.0 / (0.25 + g * g)))
    return {
        "amps": amps,
        "closed": closed,
        "truncated": trunc,
        "height": zs.height,
        "r4": _tail_r4(abs(coef), lf.k, zs.height),
        "rmax": 2 * abs(coef) / math.sqrt(0.25 + zs.height**2),
    }


def build_model_nr_r(q, zeros: dict | None = None, T: float | None = None, compensate: bool = True,
                     use_cache: bool = True) -> RaceModel:
    """X_q = rho(q) - 1 + sum over non-principal real chi of sum_gamma 2 Re(Z)/sqrt(1/4 + gamma^2).

    zeros maps discriminants to verified ZeroSets; when omitted they are computed
    (or read from the cache) to height T.
    """
    m = as_modulus(q)
    T = DEFAULT_HEIGHT if T is None else T
    amps, tail_var, r4, rmax, info = [], 0.0, 0.0, 0.0, []
    for chi in enumerate_real_characters(m)[1:]:
        d = chi.discriminant
        if zeros is not None:
            if d not in zeros:
                raise MissingZerosError(f"no zeros supplied for the character with discriminant {d}")
            zs = zeros[d]
        else:
            zs = cached_zeros(d, T, use_cache=use_cache)
        if not zs.verified:
            raise MissingZerosError(f"zeros for discriminant {d} are not verified")
        lf = LFunction.from_discriminant(d)
        c = character_contribution(lf, zs)
        amps.append(c["amps"])
        # a real character: positive ordinates carry half of the full sum, and each
        # contributes 2/(1/4+g^2) to the variance
        tv = c["closed"] - 2 * c["truncated"]
        if compensate:
            tail_var += max(tv, 0.0)
            r4 += c["r4"]
            rmax = max(rmax, c["rmax"])
        info.append({"d": d, "zeros": len(zs), "height": zs.height, "closed_form": c["closed"],
                     "truncated_sum": 2 * c["truncated"], "tail": tv})
    heights = [i["height"] for i in info]
    return RaceModel(
        float(m.rho - 1),
        np.concatenate(amps) if amps else np.zeros(0),
        tail_var,
        r4,
        rmax,
        m.q,
        min(heights) if heights else None,
        {"characters": info},
    )


def model_mean(model: RaceModel) -> float:
    return model.mean


def model_variance(model: RaceModel) -> float:
    return model.variance


@dataclass(frozen=True)
class ClosedFormVariance:
    value: float
    leading: float
    per_character: dict


def variance_closed_form(q, lprimes: dict | None = None) -> ClosedFormVariance:
    """Var[X_q] as the sum over real characters of the closed-form zero sums; no zeros needed.

    Also returns the leading term 2^(omega - 1 - eps_q) log q'.
    """
    m = as_modulus(q)
    per = {}
    for chi in enumerate_real_characters(m)[1:]:
        lf = LFunction.from_discriminant(chi.discriminant)
        if lprimes is not None and chi.discriminant in lprimes:
            lp = float(np.real(lprimes[chi.discriminant]))
            psi = -0.5772156649015329 - (1 + chi.parity) * math.log(2)
            per[chi.discriminant] = math.log(lf.k / math.pi) + psi + 2 * lp
        else:
            per[chi.discriminant] = lf.zero_sum_closed_form()
    leading = 2.0 ** (m.omega - 1 - m.eps) * math.log(m.radical)
    return ClosedFormVariance(float(sum(per.values())), leading, per)


@dataclass(frozen=True)
class BiasRatio:
    exact: float
    approximation: float


def bias_ratio(q, model: RaceModel | None = None, variance: float | None = None) -> BiasRatio:
    """B(q) = E/sqrt(Var), next to sqrt(2^(omega+1+eps)/log q')."""
    m = as_modulus(q)
    if variance is None:
        variance = model.variance if model is not None else variance_closed_form(m).value
    if variance <= 0:
        raise ZeroDivisionError("zero variance")
    approx = math.sqrt(2.0 ** (m.omega + 1 + m.eps) / math.log(m.radical))
    return BiasRatio((m.rho - 1) / math.sqrt(variance), approx)


# ---------------------------------------------------------------------------
# characteristic function and Fourier inversion


def characteristic_function(model: RaceModel, xi):
    """E[exp(i xi X)] = exp(i mean xi) prod J0(r xi) exp(-tail_var xi^2 / 2)."""
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    phi = bessel_product(np.abs(x), model.amplitudes) * np.exp(-model.tail_variance * x * x / 2)
    out = np.exp(1j * model.mean * x) * phi
    return complex(out[0]) if np.ndim(xi) == 0 else out


def _real_cf(model: RaceModel, xi: np.ndarray) -> np.ndarray:
    return bessel_product(xi, model.amplitudes) * np.exp(-model.tail_variance * xi * xi / 2)


class _Majorant:
    """Upper bound for |prod J0(r xi)| exp(-s^2 xi^2/2):
    exp(-x^2/4) below the first Bessel zero, sqrt(2/(pi x)) above."""

    def __init__(self, amps, tail_var, scale=1.0):
        r = np.sort(np.asarray(amps, dtype=float) / scale)
        self.r = r
        self.c2 = np.concatenate([[0.0], np.cumsum(r * r)])
        self.clog = np.concatenate([[0.0], np.cumsum(np.log(r))]) if r.size else np.zeros(1)
        self.tv = tail_var / scale**2

    def log(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        idx = np.searchsorted(self.r, _J0_FIRST_ZERO / xi, side="right")
        n = len(self.r)
        small = -xi * xi / 4 * self.c2[idx]
        big = 0.5 * ((n - idx) * np.log(2 / (math.pi * xi)) - (self.clog[-1] - self.clog[idx]))
        return small + big - self.tv * xi * xi / 2

    def cutoff(self, tol: float, lo: float, hi: float) -> tuple[float, float]:
        """Smallest grid point Xi with (1/pi) int_Xi^inf majorant/xi < tol, and that tail."""
        u = np.geomspace(lo, hi, 6000)
        lm = self.log(u)
        # upper sum over each log-cell, with the larger endpoint value
        cell = np.maximum(lm[:-1], lm[1:])
        dlog = np.diff(np.log(u))
        contrib = np.exp(cell) * dlog / math.pi
        tail = np.concatenate([np.cumsum(contrib[::-1])[::-1], [0.0]])
        # beyond hi: the Gaussian factor gives int_hi^inf e^{-tv u^2/2}/u <= e^{-tv hi^2/2}/(tv hi^2),
        # and the power decay u^{-n/2} of the Bessel bound gives M(hi) 2/n
        m_hi = math.exp(lm[-1])
        beyond = math.inf
        if len(self.r):
            beyond = m_hi * 2.0 / len(self.r)
        if self.tv > 0:
            beyond = min(beyond, math.exp(-self.tv * hi * hi / 2) / (self.tv * hi * hi))
        beyond /= math.pi
        tail = tail + beyond
        ok = np.nonzero(tail < tol)[0]
        if ok.size == 0:
            return hi, float(tail[-1])
        i = int(ok[0])
        return float(u[i]), float(tail[i])


@dataclass
class DensityResult:
    delta: float
    err_zero_truncation: float = 0.0
    err_frequency_truncation: float = 0.0
    err_quadrature: float = 0.0
    method: str = "fourier"
    q: int | None = None
    zero_height: float | None = None
    seed: int | None = None
    samples: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def total_error(self) -> float:
        return self.err_zero_truncation + self.err_frequency_truncation + self.err_quadrature

    @property
    def interval(self) -> tuple[float, float]:
        e = self.total_error
        return max(0.0, self.delta - e), min(1.0, self.delta + e)

    def to_json(self) -> dict:
        d = {
            "schema": 1,
            "q": self.q,
            "delta": self.delta,
            "err_zero_truncation": self.err_zero_truncation,
            "err_frequency_truncation": self.err_frequency_truncation,
            "err_quadrature": self.err_quadrature,
            "method": self.method,
            "zero_height": self.zero_height,
        }
        if self.seed is not None:
            d["seed"] = self.seed
        if self.samples is not None:
            d["samples"] = self.samples
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _gl_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (b - a) / 2 * x[None, :] + (a + b) / 2
    weights = (b - a) / 2 * w[None, :]
    return nodes.ravel(), weights.ravel()


def _panel_edges(Xi, width):
    n = max(4, int(math.ceil(Xi / width)))
    return np.linspace(0.0, Xi, n + 1)


def density_fourier(model: RaceModel, accuracy: float = 1e-6, order: int = 40) -> DensityResult:
    """delta = P[X > 0] = 1/2 + (1/pi) int_0^inf sin(mean xi) phi(xi)/xi dxi.

    phi is the real, even part of the characteristic function.  The cutoff Xi is
    taken where a rigorous majorant of |phi| integrates to below accuracy/10;
    Gauss-Legendre panels are at most half an oscillation of sin(mean xi) wide.
    """
    if accuracy <= 0:
        raise ValueError("accuracy must be positive")
    mu = model.mean
    var = model.variance
    base = dict(method="fourier", q=model.q, zero_height=model.height)
    if var == 0:
        return DensityResult(1.0 if mu > 0 else (0.0 if mu < 0 else 0.5), **base)
    if model.n_terms == 0:
        return DensityResult(float(ndtr(mu / math.sqrt(var))), **base)
    sd = math.sqrt(var)
    maj = _Majorant(model.amplitudes, model.tail_variance)
    Xi, err_freq = maj.cutoff(accuracy / 10, 1e-3 / sd, 1e6 / sd)
    rmax = float(model.amplitudes.max())
    width = math.pi / max(abs(mu), rmax, sd, 1e-12)
    edges = _panel_edges(Xi, width)
    if len(edges) > 200000:
        raise AccuracyError(f"frequency cutoff {Xi:.3g} needs too many panels")
    xi, w = _gl_panels(edges, order)
    phi = _real_cf(model, xi)
    integ = np.sin(mu * xi) * phi / xi
    val = float(np.dot(w, integ))
    xi2, w2 = _gl_panels(edges, order // 2 + 4)
    val2 = float(np.dot(w2, np.sin(mu * xi2) * _real_cf(model, xi2) / xi2))
    err_quad = abs(val - val2) / math.pi
    # replacing the zeros above the height by a Gaussian changes log phi by at most
    # C xi^4 sum r^4 while every omitted amplitude stays below the Taylor range
    err_zero = 0.0
    if model.tail_r4 > 0:
        if model.tail_rmax * Xi > _TAYLOR_XMAX:
            need = model.height * model.tail_rmax * Xi / _TAYLOR_XMAX if model.height else math.inf
            raise AccuracyError(f"zero height too low for the frequency range; need T >= {need:.4g}", need)
        C = taylor_constant_check(model.tail_rmax * Xi)
        err_zero = float(np.dot(w, np.abs(phi) * np.expm1(C * xi**4 * model.tail_r4) / xi)) / math.pi
        if err_zero > accuracy and model.height:
            need = model.height * (err_zero / accuracy) ** (1 / 3) * 1.2
            raise AccuracyError(f"accuracy {accuracy:g} unreachable at height {model.height:g}; "
                                f"need T >= {need:.4g}", need)
    delta = 0.5 + val / math.pi
    return DensityResult(float(delta), err_zero, err_freq, err_quad,
                         extra={"cutoff": Xi, "panels": len(edges) - 1}, **base)


# ---------------------------------------------------------------------------
# Monte Carlo oracle


_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_COS_BITS = 14
# cos(2 pi i / 2^14) for i = 0..2^14 + 1, used with quadratic interpolation
_COS_TAB = np.cos(2 * np.pi * np.arange((1 << _COS_BITS) + 2) / (1 << _COS_BITS))


@numba.njit(cache=True)
def _splitmix(x):
    z = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _cos_turn(u32, tab):
    """cos(2 pi u32 / 2^32) from the table; absolute error below 1e-11."""
    i = u32 >> np.uint64(32 - _COS_BITS)
    f = (u32 & np.uint64((1 << (32 - _COS_BITS)) - 1)) * (1.0 / (1 << (32 - _COS_BITS)))
    c0 = tab[i]
    c1 = tab[i + 1]
    c2 = tab[i + 2]
    # Newton forward differences through three nodes
    return c0 + f * (c1 - c0) + 0.5 * f * (f - 1.0) * (c2 - 2.0 * c1 + c0)


@numba.njit(cache=True)
def _mc_kernel(mean, amps, tail_sd, key, start, count, tab, out_moments):
    """Counter-based sampling: sample i hashes the counters (i, j); each 64-bit hash
    gives two 32-bit phases.  Results do not depend on the batching."""
    n = amps.shape[0]
    npair = (n + 1) // 2 + 1
    pos = 0
    s1 = 0.0
    s2 = 0.0
    s3 = 0.0
    lo_mask = np.uint64(0xFFFFFFFF)
    for i in range(start, start + count):
        base = key + np.uint64(i) * np.uint64(npair)
        x = mean
        for p in range(n // 2):
            h = _splitmix(base + np.uint64(p))
            x += amps[2 * p] * _cos_turn(h >> np.uint64(32), tab)
            x += amps[2 * p + 1] * _cos_turn(h & lo_mask, tab)
        h = _splitmix(base + np.uint64(npair - 1))
        if n % 2 == 1:
            x += amps[n - 1] * _cos_turn(_splitmix(h) >> np.uint64(32), tab)
        if tail_sd > 0:
            u1 = ((h >> np.uint64(32)) + 0.5) * (1.0 / 4294967296.0)
            u2 = (h & lo_mask) * (1.0 / 4294967296.0)
            x += tail_sd * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        if x > 0:
            pos += 1
        c = x - mean
        s1 += c
        s2 += c * c
        s3 += c * c * c
    out_moments[0] += s1
    out_moments[1] += s2
    out_moments[2] += s3
    return pos


def _sample_batches(model: RaceModel, samples: int, seed: int, batch: int = 1 << 20):
    key = np.uint64(_seed_key(seed))
    amps = np.ascontiguousarray(model.amplitudes)
    tail_sd = math.sqrt(model.tail_variance)
    mom = np.zeros(3)
    pos = 0
    for start in range(0, samples, batch):
        pos += _mc_kernel(model.mean, amps, tail_sd, key, start, min(batch, samples - start), _COS_TAB, mom)
    return pos, mom


def _seed_key(seed: int) -> int:
    return (int(seed) * 0x2545F4914F6CDD1D) % (1 << 64)


def density_montecarlo(model: RaceModel, samples: int = 10**6, seed: int = 0) -> DensityResult:
    """Frequency of X > 0 over independent draws of the phases, with its binomial error."""
    if samples < 1:
        raise ValueError("samples must be positive")
    pos, mom = _sample_batches(model, samples, seed)
    p = pos / samples
    se = math.sqrt(max(p * (1 - p), 0.0) / samples)
    return DensityResult(p, 0.0, 0.0, se, "montecarlo", model.q, model.height, seed, samples,
                         extra={"std_error": se, "centered_moments": (mom / samples).tolist()})


# ---------------------------------------------------------------------------
# Gaussian approximations and bounds


@dataclass(frozen=True)
class GaussianApproximation:
    delta: float  # Phi(B) with B = sqrt(2^(omega+1+eps)/log q')
    remark: float  # Phi(sqrt(2^(omega-1)/log q'))
    B: float


def density_gaussian(q) -> GaussianApproximation:
    """Gaussian approximations to delta(q; NR, R) from the size of the bias ratio."""
    m = as_modulus(q)
    lr = math.log(m.radical)
    B = math.sqrt(2.0 ** (m.omega + 1 + m.eps) / lr)
    return GaussianApproximation(float(ndtr(B)), float(ndtr(math.sqrt(2.0 ** (m.omega - 1) / lr))), B)


def gaussian_cdf(x) -> float:
    return float(ndtr(x))


@dataclass(frozen=True)
class BerryEsseenResult:
    gap: float
    at: float
    comparator: float | None
    cutoff: float
    truncation: float


def _cdf_difference(model: RaceModel, x: np.ndarray, accuracy: float = 1e-7, max_cutoff: float = 2000.0):
    """F_Y(x) - Phi(x) for Y = (X - mean)/sd by Fourier inversion of the difference."""
    sd = math.sqrt(model.variance)
    amps = model.amplitudes / sd
    tv = model.tail_variance / model.variance
    maj = _Majorant(amps, tv)
    Xi, trunc = maj.cutoff(accuracy, 1e-3, max_cutoff)
    Xi = max(Xi, 12.0)  # the Gaussian part must be resolved too
    width = math.pi / max(float(np.max(np.abs(x))), float(amps.max()) if amps.size else 1.0, 1.0)
    edges = _panel_edges(Xi, width)
    xi, w = _gl_panels(edges, 24)
    phi = bessel_product(xi, amps) * np.exp(-tv * xi * xi / 2)
    g = (phi - np.exp(-xi * xi / 2)) / xi * w
    diff = np.empty(len(x))
    for i0 in range(0, len(x), 256):
        xs = x[i0:i0 + 256]
        diff[i0:i0 + 256] = np.sin(np.outer(xs, xi)) @ g / math.pi
    return diff, Xi, trunc


def berry_esseen_gap(model: RaceModel, grid=None, step: float = 0.01, accuracy: float = 1e-7) -> BerryEsseenResult:
    """sup_x |F(x) - Phi(x)| for the centered, normalized race variable.

    The comparator 1/(rho(q) log q') is returned when the model carries its modulus.
    """
    if grid is None:
        grid = np.arange(-6.0, 6.0 + step / 2, step)
    grid = np.asarray(grid, dtype=float)
    if len(grid) > 1 and np.max(np.diff(np.sort(grid))) > 1e-2 + 1e-12:
        raise ValueError("grid step must be at most 1e-2")
    if model.variance <= 0:
        raise ValueError("degenerate model")
    diff, Xi, trunc = _cdf_difference(model, grid, accuracy)
    i = int(np.argmax(np.abs(diff)))
    comp = None
    if model.q is not None:
        m = as_modulus(model.q)
        comp = 1.0 / (m.rho * math.log(m.radical))
    return BerryEsseenResult(float(abs(diff[i])), float(grid[i]), comp, Xi, trunc)


def normalized_cdf(model: RaceModel, x) -> np.ndarray:
    """F_Y(x) for Y = (X - mean)/sd."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    diff, _, _ = _cdf_difference(model, x)
    return ndtr(x) + diff


def chebyshev_lower_bound(model: RaceModel | None = None, mean: float | None = None,
                          variance: float | None = None) -> float:
    """1 - 2 Var/E^2 when E >= 4, else the trivial bound 0."""
    E = model.mean if mean is None else mean
    V = model.variance if variance is None else variance
    if E < 4:
        return 0.0
    return max(0.0, 1.0 - 2.0 * V / (E * E))


@dataclass(frozen=True)
class MOBounds:
    upper: float | None  # bound on P[Y >= V]
    lower_exponent: float | None  # exponent V^2/sum r^2 of the lower branch, up to constants
    upper_margin: float  # V/2 - sum_{r >= alpha} r  (hypothesis holds when >= 0)
    lower_margin: float  # sum_{r >= alpha} r - 2V
    small_sum: float  # sum_{r < alpha} r^2 (Gaussian tail included as 2 * tail variance)

    @property
    def density_lower(self) -> float | None:
        """1 - upper: a lower bound for delta when V is the mean."""
        return None if self.upper is None else 1.0 - self.upper


def montgomery_odlyzko_bounds(model: RaceModel, V: float | None = None, alpha: float = 4.0) -> MOBounds | None:
    """Large-deviation bounds for Y = X - E[X] with phases Y_n = cos(theta_n), |Y_n| <= 1.

    Upper branch: if sum_{r >= alpha} r <= V/2 then P[Y >= V] <= exp(-V^2/(16 sum_{r<alpha} r^2)).
    Lower branch: if sum_{r >= alpha} r >= 2V then P[Y >= V] >= a1 exp(-a2 V^2/sum_{r<alpha} r^2)
    with unspecified a1, a2; only the exponent is returned.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    V = model.mean if V is None else V
    if V <= 0:
        raise ValueError("V must be positive")
    r = model.amplitudes
    big = float(np.sum(r[r >= alpha]))
    small = float(np.sum(r[r < alpha] ** 2)) + 2 * model.tail_variance
    up_margin = V / 2 - big
    lo_margin = big - 2 * V
    upper = math.exp(-V * V / (16 * small)) if (up_margin >= 0 and small > 0) else None
    if up_margin >= 0 and small == 0:
        upper = 0.0
    lower = V * V / small if (lo_margin >= 0 and small > 0) else None
    if upper is None and lower is None:
        return MOBounds(None, None, up_margin, lo_margin, small)
    return MOBounds(upper, lower, up_margin, lo_margin, small)


@dataclass(frozen=True)
class MomentReport:
    mean: float
    variance: float
    second_moment: float
    sampled_mean: float
    sampled_second_moment: float
    sampled_skewness: float
    skewness_sigma: float
    cf_second_moment: float
    samples: int

    @property
    def ok(self) -> bool:
        cf_ok = abs(self.cf_second_moment - self.second_moment) <= 1e-6 * self.second_moment
        se = math.sqrt(self.variance / self.samples)
        mean_ok = abs(self.sampled_mean - self.mean) <= 5 * se + 1e-12
        return cf_ok and mean_ok and abs(self.sampled_skewness) <= 3 * self.skewness_sigma


def sample_moments_check(model: RaceModel, samples: int = 200000, seed: int = 1) -> MomentReport:
    """First two moments from the characteristic function (by differentiation at 0)
    and from sampling; sampled skewness of the centered variable."""
    # -phi''(0) for the real part gives E[(X-mean)^2]; use a 4th-order difference
    h = 1e-2 / max(math.sqrt(model.variance), 1e-12)
    f = lambda x: float(_real_cf(model, np.array([x]))[0])  # noqa: E731
    d2 = (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h)
    cf_var = -d2
    pos, mom = _sample_batches(model, samples, seed)
    m1, m2, m3 = mom / samples
    var_s = m2 - m1 * m1
    skew = (m3 - 3 * m1 * m2 + 2 * m1**3) / var_s**1.5 if var_s > 0 else 0.0
    return MomentReport(model.mean, model.variance, model.mean**2 + model.variance,
                        model.mean + m1, (model.mean + m1) ** 2 + var_s, skew,
                        math.sqrt(6.0 / samples), model.mean**2 + cf_var, samples)


def taylor_constant_check(xmax: float = 12 / 5, n: int = 2000) -> float:
    """max over 0 < x <= xmax of |log J0(x) + x^2/4| / x^4 (1/64 in the limit x -> 0)."""
    if xmax <= 1e-3:
        return 1 / 64 * 1.001
    x = np.linspace(1e-3, xmax, n)
    # the ratio is increasing in x, so the grid maximum is attained at xmax
    return float(np.max(np.abs(log_j0_taylor_constant(x))))
