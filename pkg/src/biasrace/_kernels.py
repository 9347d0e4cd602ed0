"""Compiled inner loops: Dirichlet partial sums and the Euler-Maclaurin tail
of the Hurwitz decomposition."""
from __future__ import annotations

import math

import numba
import numpy as np
from scipy.special import bernoulli

EM_TERMS = 25
# B_{2j} / (2j)!
EM_COEF = np.array(
    [bernoulli(2 * EM_TERMS)[2 * j] / math.factorial(2 * j) for j in range(1, EM_TERMS + 1)],
    dtype=np.float64,
)


@numba.njit(cache=True)
def main_sum(avals, cvals, k, M, s):
    """sum_{n <= kM} c(n) n^{-s}, with c supported on the residues avals (1..k)."""
    acc = 0j
    for m in range(M):
        base = m * k
        for i in range(avals.shape[0]):
            n = base + avals[i]
            acc += cvals[i] * np.exp(-s * math.log(n))
    return acc


@numba.njit(cache=True)
def hardy_main_real(avals, cvals, k, M, t, theta):
    """sum_{n <= kM} c(n) n^{-1/2} cos(theta - t log n) for a real character."""
    acc = 0.0
    for m in range(M):
        base = m * k
        for i in range(avals.shape[0]):
            n = base + avals[i]
            ln = math.log(n)
            acc += cvals[i] * math.exp(-0.5 * ln) * math.cos(theta - t * ln)
    return acc


@numba.njit(cache=True)
def hurwitz_tail(avals, cvals, k, M, s, coef):
    """k^{-s} sum_a c(a) zeta(s, M + a/k) by Euler-Maclaurin.

    The pole part x^{1-s}/(s-1) is kept; at s = 1 it is replaced by -log x,
    which is the finite part and is correct whenever sum_a c(a) = 0.
    """
    at_pole = abs(s - 1.0) < 1e-12
    acc = 0j
    J = coef.shape[0]
    for i in range(avals.shape[0]):
        x = M + avals[i] / k
        lx = math.log(x)
        xs = np.exp(-s * lx)
        if at_pole:
            val = -lx + xs * 0.5
        else:
            val = x * xs / (s - 1.0) + xs * 0.5
        p = s
        pw = 1.0 / x
        ix2 = pw * pw
        em = 0j
        for j in range(1, J + 1):
            em += coef[j - 1] * p * pw
            p = p * (s + 2 * j - 1) * (s + 2 * j)
            pw = pw * ix2
        acc += cvals[i] * (val + xs * em)
    return np.exp(-s * math.log(k)) * acc

