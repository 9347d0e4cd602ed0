"""Elementary multiplicative arithmetic for race moduli.

Everything here is exact integer arithmetic; floats only appear in the
ratios and constants that the density tables report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
# largest integer the moduli-sequence construction is allowed to produce per prime
_INTERVAL_CAP = math.log(2.0**62)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    m = max(n + 1, 2)
    while not is_prime(m):
        m += 1
    return m


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization as increasing (prime, exponent) pairs.

    Trial division, stopping as soon as the cofactor is prime.
    """
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    out = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    p, step = 5, 2
    while n > 1 and p * p <= n:
        if is_prime(n):
            break
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return out


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factorize(n):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def euler_phi(n: int) -> int:
    r = n
    for p, _ in factorize(n):
        r -= r // p
    return r


def von_mangoldt(n: int) -> float:
    if n < 2:
        return 0.0
    f = factorize(n)
    return math.log(f[0][0]) if len(f) == 1 else 0.0


def _rho_from_factors(factors) -> int:
    omega = len(factors)
    e2 = dict(factors).get(2, 0)
    if e2 == 0:
        return 2**omega
    if e2 == 1:
        return 2 ** (omega - 1)
    if e2 == 2:
        return 2**omega
    return 2 ** (omega + 1)


@dataclass(frozen=True)
class Modulus:
    """A modulus q >= 3 together with the multiplicative data races need."""

    q: int
    factors: tuple[tuple[int, int], ...] = field(repr=False)

    def __post_init__(self):
        if self.q < 3:
            raise ValueError(f"modulus must be >= 3 (no race mod {self.q})")
        prod = 1
        for p, e in self.factors:
            prod *= p**e
        if prod != self.q:
            raise ValueError("factorization does not multiply out to q")

    @classmethod
    def of(cls, q: int) -> "Modulus":
        return _modulus_cached(int(q))

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def radical(self) -> int:
        r = 1
        for p, _ in self.factors:
            r *= p
        return r

    @property
    def rho(self) -> int:
        return _rho_from_factors(self.factors)

    @property
    def euler_phi(self) -> int:
        r = 1
        for p, e in self.factors:
            r *= (p - 1) * p ** (e - 1)
        return r

    @property
    def reduced(self) -> int:
        """2^min(3,e) times the odd part of the radical; same race density as q."""
        e2 = dict(self.factors).get(2, 0)
        odd = 1
        for p, _ in self.factors:
            if p != 2:
                odd *= p
        return 2 ** min(3, e2) * odd

    @property
    def is_even(self) -> bool:
        return self.q % 2 == 0

    @property
    def eps(self) -> int:
        """1 if q is even, else 0 (the parity correction in the variance asymptotic)."""
        return 1 if self.is_even else 0

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


@lru_cache(maxsize=4096)
def _modulus_cached(q: int) -> Modulus:
    return Modulus(q, tuple(factorize(q)))


def as_modulus(q) -> Modulus:
    return q if isinstance(q, Modulus) else Modulus.of(q)


def rho(q) -> int:
    """Index [G:G^2] of the squares in (Z/qZ)^x (case formula)."""
    return as_modulus(q).rho


@lru_cache(maxsize=256)
def _square_mask(q: int) -> np.ndarray:
    n = np.arange(q, dtype=np.int64)
    mask = np.zeros(q, dtype=bool)
    units = n[np.gcd(n, q) == 1]
    mask[(units * units) % q] = True
    mask.setflags(write=False)
    return mask


def rho_bruteforce(q: int) -> int:
    """[G:G^2] by enumerating the squares of the unit group."""
    phi = euler_phi(q)
    return phi // int(_square_mask(q).sum())


def classify_residue(a: int, q) -> int:
    """1 if a is a square modulo q, 0 otherwise; a must be coprime to q."""
    m = as_modulus(q)
    if math.gcd(a, m.q) != 1:
        raise ValueError(f"{a} is not invertible mod {m.q}")
    if m.q <= 10**6:
        return int(_square_mask(m.q)[a % m.q])
    # above the brute-force range: a is a square iff every real character is 1 on it,
    # i.e. iff it is a square modulo each prime power
    for p, e in m.factors:
        if p == 2:
            if e == 2 and a % 4 != 1:
                return 0
            if e >= 3 and a % 8 != 1:
                return 0
        elif pow(a % p, (p - 1) // 2, p) != 1:
            return 0
    return 1


def ratio_rho_logradical(q) -> float:
    m = as_modulus(q)
    return m.rho / math.log(m.radical)


def half_primorial(k: int) -> Modulus:
    """Product of the first k odd primes."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > 64:
        raise OverflowError("half_primorial is capped at k = 64 (rho would exceed 2^64)")
    primes, p = [], 2
    while len(primes) < k:
        p = next_prime(p)
        primes.append(p)
    q = math.prod(primes)
    return Modulus(q, tuple((p, 1) for p in primes))


def lambda_density_exponent() -> float:
    """1 - (1 + log log 2)/log 2."""
    return 1.0 - (1.0 + math.log(math.log(2.0))) / math.log(2.0)


@dataclass(frozen=True)
class ModuliSequence:
    c: float
    e_c: int
    c1: float
    moduli: tuple[Modulus, ...]
    ratios: tuple[float, ...]
    primes_I: tuple[int, ...]
    primes_J: tuple[int, ...]


class IntervalRangeError(OverflowError):
    pass


def _prime_in(lo: float, hi: float) -> int:
    p = next_prime(math.floor(lo))
    if p >= hi:
        raise ValueError(f"no prime in ({lo}, {hi})")
    return p


def construct_moduli_sequence(c: float, n: int) -> ModuliSequence:
    """Squarefree odd q_1 < q_2 < ... with 2^(omega(q_n)+1) / log q_n -> c.

    One prime is taken in each I_l = (exp(2^l/c1), 2 exp(2^l/c1)) for l <= n and
    in each J_l = (2 exp(2^l/c1), 4 exp(2^l/c1)) for l <= e_c.  The intervals
    grow doubly exponentially, so only a handful of terms fit below 2^62.
    """
    if not (0 < c < math.inf):
        raise ValueError("c must be a positive finite real")
    if n < 1:
        raise ValueError("n must be >= 1")
    e_c = 1
    while c / 2**e_c >= 2 / math.log(4):
        e_c += 1
    c1 = c / 2**e_c
    top = max(n, e_c)
    if 2**top / c1 > _INTERVAL_CAP - math.log(4):
        raise IntervalRangeError(
            f"interval exceeds integer range: exp(2^{top}/c1) with c1={c1:.4g} "
            f"is beyond 2^62 (largest admissible n for this c is "
            f"{_max_index(c1)})"
        )
    centers = {l: math.exp(2**l / c1) for l in range(1, top + 1)}
    primes_J = tuple(_prime_in(2 * centers[l], 4 * centers[l]) for l in range(1, e_c + 1))
    primes_I = tuple(_prime_in(centers[l], 2 * centers[l]) for l in range(1, n + 1))
    moduli, ratios = [], []
    for m in range(1, n + 1):
        ps = sorted(primes_J + primes_I[:m])
        q = math.prod(ps)
        moduli.append(Modulus(q, tuple((p, 1) for p in ps)))
        ratios.append(2 ** (len(ps) + 1) / math.log(q))
    return ModuliSequence(c, e_c, c1, tuple(moduli), tuple(ratios), primes_I, primes_J)


def _max_index(c1: float) -> int:
    l = 0
    while 2 ** (l + 1) / c1 <= _INTERVAL_CAP - math.log(4):
        l += 1
    return l
