"""Dirichlet L-functions of primitive characters.

L(s) is evaluated through the Hurwitz decomposition

    L(s) = sum_{n <= kM} c(n) n^-s + k^-s sum_{a=1}^{k} c(a) zeta(s, M + a/k),

with the Hurwitz tails done by Euler-Maclaurin.  M grows linearly with |s|, so
the cost is about k|s|/pi terms; fine for the conductors and heights used here.
"""
from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np
from scipy.special import digamma, exp1, gamma, gammaincc, loggamma

from . import _kernels as K
from .characters import (
    DirichletCharacter,
    RealCharacter,
    is_fundamental_discriminant,
    kronecker_table,
    kronecker_values,
    root_number,
)

EULER_GAMMA = 0.5772156649015329


class AccuracyError(ArithmeticError):
    """Raised when an evaluation cannot reach its stated tolerance."""

    def __init__(self, message, required_height: float | None = None):
        super().__init__(message)
        self.required_height = required_height


class LFunction:
    """L(s, chi) for a primitive character given by its value table mod k.

    The trivial table [1] with k = 1 is the Riemann zeta function.
    """

    def __init__(self, table, parity: int, label: str = "", eps: complex | None = None):
        table = np.asarray(table, dtype=np.complex128)
        self.k = len(table)
        self.table = table
        self.parity = 1 if parity > 0 else -1
        self.a = 0 if self.parity > 0 else 1
        self.label = label or f"k={self.k}"
        self.is_real = bool(np.all(table.imag == 0))
        self.is_zeta = self.k == 1
        avals = np.array([a for a in range(1, self.k + 1) if table[a % self.k] != 0], dtype=np.int64)
        self._avals = avals
        self._cvals = np.ascontiguousarray(table[avals % self.k])
        self._cvals_real = np.ascontiguousarray(self._cvals.real)
        if eps is None:
            eps = 1.0 + 0j if self.is_real else root_number(table, self.parity)
        self.eps = complex(eps)
        # Z(t) = e^{i theta} eps^{-1/2} L(1/2+it) is real
        self._rot = 1.0 / cmath.sqrt(self.eps)

    @classmethod
    def from_discriminant(cls, d: int) -> "LFunction":
        return _lfunction_for_discriminant(int(d))

    @classmethod
    def from_character(cls, chi) -> "LFunction":
        """L-function of the primitive character inducing chi."""
        if isinstance(chi, RealCharacter):
            return cls.from_discriminant(chi.discriminant)
        if isinstance(chi, DirichletCharacter):
            d = chi.real_discriminant()
            if d is not None:
                return cls.from_discriminant(d)
            return cls(chi.primitive_values, chi.parity, label=chi.label())
        if isinstance(chi, LFunction):
            return chi
        return cls.from_discriminant(int(chi))

    # -- evaluation ---------------------------------------------------------

    @staticmethod
    def _terms(s: complex) -> int:
        return max(4, int(math.ceil((abs(s) + 2 * K.EM_TERMS) / math.pi)))

    def evaluate(self, s) -> complex:
        s = complex(s)
        if abs(s - 1) < 1e-12 and (self.is_zeta):
            raise ValueError("zeta has a pole at s = 1")
        M = self._terms(s)
        main = K.main_sum(self._avals, self._cvals, self.k, M, s)
        tail = K.hurwitz_tail(self._avals, self._cvals, self.k, M, s, K.EM_COEF)
        return complex(main + tail)

    __call__ = evaluate

    def theta(self, t):
        """Phase of the gamma factor: (t/2) log(k/pi) + Im log Gamma((1/2 + a + it)/2)."""
        t = np.asarray(t, dtype=float)
        out = 0.5 * t * math.log(self.k / math.pi) + loggamma((0.5 + self.a + 1j * t) / 2).imag
        return float(out) if out.ndim == 0 else out

    def theta_prime(self, t):
        t = np.asarray(t, dtype=float)
        out = 0.5 * math.log(self.k / math.pi) + 0.5 * digamma((0.5 + self.a + 1j * t) / 2).real
        return float(out) if out.ndim == 0 else out

    def hardy(self, t: float) -> float:
        """The real function Z(t) whose sign changes are the zeros on the critical line."""
        t = float(t)
        th = self.theta(t)
        s = complex(0.5, t)
        M = self._terms(s)
        if self.is_real and self.eps == 1:
            main = K.hardy_main_real(self._avals, self._cvals_real, self.k, M, t, th)
            tail = K.hurwitz_tail(self._avals, self._cvals, self.k, M, s, K.EM_COEF)
            return float(main + (cmath.exp(1j * th) * tail).real)
        return float((cmath.exp(1j * th) * self._rot * self.evaluate(s)).real)

    def hardy_complex(self, t: float) -> complex:
        """e^{i theta} eps^{-1/2} L(1/2+it) without taking the real part (for residual checks)."""
        th = self.theta(float(t))
        return cmath.exp(1j * th) * self._rot * self.evaluate(complex(0.5, t))

    def completed(self, s) -> complex:
        """Lambda(s) = (k/pi)^{(s+a)/2} Gamma((s+a)/2) L(s)."""
        s = complex(s)
        w = (s + self.a) / 2
        return complex(np.exp(w * math.log(self.k / math.pi) + loggamma(w)) * self.evaluate(s))

    # -- zero counting -------------------------------------------------------

    def arg_l(self, t: float, sigma0: float = 2.0) -> float:
        """arg L(1/2+it) by continuous variation along the horizontal segment from sigma0.

        Re L(2+it) > 0 for every character, so the starting branch is the principal one.
        """
        if self.is_zeta and abs(t) < 1e-9:
            raise ValueError("horizontal path through the pole of zeta")
        sig = np.linspace(sigma0, 0.5, 9)
        vals = [self.evaluate(complex(x, t)) for x in sig]
        total = cmath.phase(vals[0])
        for i in range(len(sig) - 1):
            total += self._phase_change(sig[i], vals[i], sig[i + 1], vals[i + 1], t, 0)
        return total

    def _phase_change(self, s0, v0, s1, v1, t, depth) -> float:
        d = cmath.phase(v1 / v0)
        if abs(d) <= math.pi / 4 or depth >= 40:
            if depth >= 40:
                raise AccuracyError(f"argument unwinding did not settle near t={t}")
            return d
        sm = 0.5 * (s0 + s1)
        vm = self.evaluate(complex(sm, t))
        return self._phase_change(s0, v0, sm, vm, t, depth + 1) + self._phase_change(sm, vm, s1, v1, t, depth + 1)

    @property
    def _arg_at_zero(self) -> float:
        if not hasattr(self, "_arg0"):
            self._arg0 = 0.0 if self.is_zeta else self.arg_l(0.0)
        return self._arg0

    def S(self, t: float) -> float:
        """S(t) = (1/pi) arg L(1/2+it), relative to its value at t = 0."""
        return (self.arg_l(t) - self._arg_at_zero) / math.pi

    def count_zeros_raw(self, t: float) -> float:
        """Number of zeros with 0 < gamma <= t from the argument principle.

        The result is real; it sits near an integer unless t is close to a zero.
        """
        if self.is_zeta:
            return self.theta(t) / math.pi + 1.0 + self.arg_l(t) / math.pi
        return (self.theta(t) - self.theta(0.0)) / math.pi + self.S(t)

    def count_zeros(self, t: float) -> int:
        raw = self.count_zeros_raw(t)
        n = int(round(raw))
        if abs(raw - n) > 0.25:
            raise AccuracyError(f"zero count {raw:.4f} at t={t} is not near an integer")
        return n

    def smooth_count(self, t: float) -> float:
        """The main term (theta(t) - theta(0))/pi of the zero count."""
        return (self.theta(t) - self.theta(0.0)) / math.pi

    # -- values at s = 1 ------------------------------------------------------

    def evaluate_theta_series(self, s: float) -> float:
        """L(s) for real s and a real character from the incomplete-gamma expansion

            Lambda(s) = sum_n chi(n) [(k/pi)^w n^-s G(w, x_n) + (k/pi)^w' n^(s-1) G(w', x_n)],

        w = (s+a)/2, w' = (1-s+a)/2, x_n = pi n^2 / k.  About 4 sqrt(k) terms.
        """
        if not self.is_real or self.is_zeta:
            raise ValueError("theta-series evaluation needs a non-principal real character")
        s = float(s)
        nmax = int(math.sqrt(60.0 * self.k / math.pi)) + 2
        n = np.arange(1, nmax + 1)
        c = self._values_at(n)
        x = math.pi * n.astype(float) ** 2 / self.k
        w, w2 = (s + self.a) / 2, (1 - s + self.a) / 2
        lk = math.log(self.k / math.pi)
        G1 = _upper_gamma(w, x)
        G2 = _upper_gamma(w2, x)
        ln = np.log(n)
        lam = np.sum(c * (np.exp(w * lk - s * ln) * G1 + np.exp(w2 * lk - (1 - s) * ln) * G2))
        return float(lam / (math.exp(w * lk) * gamma(w)))

    def _values_at(self, n):
        if self.k <= 10**7 and len(self.table) == self.k:
            return self.table.real[n % self.k]
        return kronecker_values(self._disc, n).astype(float)

    def log_derivative_at_one(self, radius: float = 0.5, nodes: int = 32, method: str = "auto") -> complex:
        """L'/L(1).

        "cauchy": L'(1) from the Cauchy integral of the Euler-Maclaurin evaluator on a
        circle around 1.  "theta": a 7-point central difference of the theta series
        (real characters only; cost ~ sqrt(k), so it is the choice for large k).
        """
        if self.is_zeta:
            raise ValueError("zeta has a pole at s = 1")
        if method == "auto":
            method = "theta" if (self.is_real and self.k > 20000) else "cauchy"
        if method == "theta":
            h = 2e-3
            f = self.evaluate_theta_series
            d1 = (f(1 + h) - f(1 - h)) / (2 * h)
            d2 = (f(1 + 2 * h) - f(1 - 2 * h)) / (4 * h)
            d3 = (f(1 + 3 * h) - f(1 - 3 * h)) / (6 * h)
            deriv = (15 * d1 - 6 * d2 + d3) / 10
            return complex(deriv / f(1.0))
        ang = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
        z = radius * np.exp(1j * ang)
        vals = np.array([self.evaluate(1 + zz) for zz in z])
        deriv = np.mean(vals / z)
        return complex(deriv / self.evaluate(1.0))

    def zero_sum_closed_form(self) -> float:
        """sum over all zeros (both signs of gamma) of 1/(1/4 + gamma^2).

        log(k/pi) + psi((1+a)/2) + 2 Re L'/L(1); for a real character this is
        log k - log pi - gamma_E - (1 + chi(-1)) log 2 + 2 L'/L(1).
        """
        psi = -EULER_GAMMA - 2 * math.log(2) if self.a == 0 else -EULER_GAMMA
        return math.log(self.k / math.pi) + psi + 2 * self.log_derivative_at_one().real


def _upper_gamma(w: float, x: np.ndarray) -> np.ndarray:
    """Gamma(w, x) for w > -1 and x > 0."""
    if w > 0:
        return gammaincc(w, x) * gamma(w)
    if w == 0:
        return exp1(x)
    # Gamma(w, x) = (Gamma(w+1, x) - x^w e^-x) / w
    return (gammaincc(w + 1, x) * gamma(w + 1) - np.exp(w * np.log(x) - x)) / w


@lru_cache(maxsize=256)
def _lfunction_for_discriminant(d: int) -> LFunction:
    if d == 1:
        lf = LFunction(np.array([1.0]), 1, label="zeta")
    elif not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    else:
        lf = LFunction(kronecker_table(d), 1 if d > 0 else -1, label=f"d={d}", eps=1.0)
    lf._disc = d
    return lf


def evaluate_l(chi, s) -> complex:
    """L(s, chi*) for the primitive character inducing chi."""
    if isinstance(chi, RealCharacter) and chi.is_principal:
        raise ValueError("principal characters are not supported")
    return LFunction.from_character(chi).evaluate(s)


def expected_zero_count(k: int, T: float, positive_only: bool = False) -> float:
    """(T/pi) log(kT / (2 pi e)): the classical asymptotic for the number of zeros
    with |gamma| <= T, halved when only positive ordinates are counted."""
    if T <= 0:
        return 0.0
    n = T / math.pi * math.log(k * T / (2 * math.pi * math.e))
    return n / 2 if positive_only else n
