"""Dirichlet characters: real ones via Kronecker symbols, complex ones via
discrete logarithms on the CRT decomposition of (Z/qZ)^x."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arith import Modulus, as_modulus, divisors, factorize


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    res = 1
    if n < 0:
        n = -n
        if a < 0:
            res = -res
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            res = -res
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                res = -res
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            res = -res
        a %= n
    return res if n == 1 else 0


def is_fundamental_discriminant(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return _squarefree(abs(d))
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n))


def prime_discriminants(d: int) -> list[int]:
    """Factor a fundamental discriminant into prime discriminants -4, +-8, p* = +-p."""
    if not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    out, rest = [], d
    for p, _ in factorize(abs(d)):
        if p == 2:
            continue
        ps = p if p % 4 == 1 else -p
        out.append(ps)
        rest //= ps
    if rest != 1:
        out.insert(0, rest)  # -4, 8 or -8
    return out


def _prime_disc_values(pd: int, n: np.ndarray) -> np.ndarray:
    if pd == -4:
        r = n % 4
        return np.where(r == 1, 1, np.where(r == 3, -1, 0)).astype(np.int8)
    if pd in (8, -8):
        r = n % 8
        pos = (1, 7) if pd == 8 else (1, 3)
        neg = (3, 5) if pd == 8 else (5, 7)
        return np.where(np.isin(r, pos), 1, np.where(np.isin(r, neg), -1, 0)).astype(np.int8)
    p = abs(pd)
    leg = np.full(p, -1, dtype=np.int8)
    leg[0] = 0
    sq = (np.arange(1, p, dtype=np.int64) ** 2) % p
    leg[sq] = 1
    return leg[n % p]


def kronecker_values(d: int, n) -> np.ndarray:
    """(d/n) for an array of n >= 0 and fundamental d, through the prime discriminants."""
    n = np.asarray(n, dtype=np.int64)
    out = np.ones(n.shape, dtype=np.int8)
    if d == 1:
        return out
    for pd in prime_discriminants(d):
        out *= _prime_disc_values(pd, n)
    return out


@lru_cache(maxsize=64)
def kronecker_table(d: int) -> np.ndarray:
    """(d/n) for n = 0..|d|-1; periodic in n with period |d| for fundamental d."""
    tab = kronecker_values(d, np.arange(abs(d))).astype(np.float64)
    tab.setflags(write=False)
    return tab


@dataclass(frozen=True)
class RealCharacter:
    """A real character mod q, induced by the Kronecker symbol of a fundamental
    discriminant d (d = 1 is the principal character)."""

    modulus: int
    discriminant: int

    @property
    def conductor(self) -> int:
        return abs(self.discriminant)

    @property
    def is_principal(self) -> bool:
        return self.discriminant == 1

    @property
    def parity(self) -> int:
        return 1 if self.discriminant > 0 else -1

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def __call__(self, n: int) -> int:
        return character_value(self, n)


def character_value(chi: RealCharacter, n: int) -> int:
    if math.gcd(n, chi.modulus) != 1:
        return 0
    return kronecker(chi.discriminant, n)


def enumerate_real_characters(q) -> list[RealCharacter]:
    """All real characters mod q, principal first, then by conductor."""
    m = as_modulus(q)
    out = [RealCharacter(m.q, 1)]
    for c in divisors(m.q):
        for d in (c, -c):
            if d != 1 and is_fundamental_discriminant(d):
                out.append(RealCharacter(m.q, d))
    out[1:] = sorted(out[1:], key=lambda x: (x.conductor, x.discriminant))
    return out


def real_character_discriminants(q) -> list[int]:
    """Fundamental discriminants of the non-principal real characters mod q."""
    return [c.discriminant for c in enumerate_real_characters(q)[1:]]


# ---------------------------------------------------------------------------
# full character group


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """A character mod q stored as its value table on 0..q-1."""

    modulus: int
    index: tuple[int, ...]
    values: np.ndarray = field(repr=False)
    conductor: int
    primitive_values: np.ndarray = field(repr=False)

    @property
    def is_principal(self) -> bool:
        return self.conductor == 1

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.values.imag) < 1e-12))

    @property
    def parity(self) -> int:
        return 1 if self.values[self.modulus - 1].real > 0 else -1

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])

    def label(self) -> str:
        return f"{self.modulus}." + ".".join(map(str, self.index))

    def real_discriminant(self) -> int | None:
        """Fundamental discriminant of the inducing primitive character when real."""
        if not self.is_real:
            return None
        if self.conductor == 1:
            return 1
        for d in (self.conductor, -self.conductor):
            if is_fundamental_discriminant(d):
                tab = kronecker_table(d)
                if np.allclose(tab, self.primitive_values.real):
                    return d
        raise AssertionError("real primitive character without a discriminant")


def _primitive_root(p: int) -> int:
    phi = p - 1
    qs = [r for r, _ in factorize(phi)]
    for g in range(2, p):
        if all(pow(g, phi // r, p) != 1 for r in qs):
            return g
    raise AssertionError


def _component_generators(p: int, e: int) -> list[tuple[int, int]]:
    """(generator, order) pairs for (Z/p^eZ)^x."""
    pe = p**e
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            return [(pe - 1, 2)]
        return [(pe - 1, 2), (5, 2 ** (e - 2))]
    g = _primitive_root(p)
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    return [(g, (p - 1) * p ** (e - 1))]


@lru_cache(maxsize=64)
def _group_structure(q: int):
    """Generators (lifted to Z/q) and the discrete-log table of every unit."""
    gens, orders = [], []
    for p, e in factorize(q):
        pe = p**e
        rest = q // pe
        for g, order in _component_generators(p, e):
            # lift: g mod p^e, 1 mod the rest
            lifted = (g * rest * pow(rest, -1, pe) + pe * pow(pe, -1, rest)) % q if rest > 1 else g % q
            gens.append(lifted)
            orders.append(order)
    logs = np.full((q, len(gens)), -1, dtype=np.int64)
    # enumerate the group as products of generator powers
    elems = {1 % q: tuple([0] * len(gens))}
    for j, (g, order) in enumerate(zip(gens, orders)):
        new = {}
        for x, vec in elems.items():
            y = x
            for k in range(order):
                v = list(vec)
                v[j] = k
                new[y] = tuple(v)
                y = y * g % q
        elems = new
    for x, vec in elems.items():
        logs[x] = vec
    return tuple(gens), tuple(orders), logs


@lru_cache(maxsize=64)
def dirichlet_group(q: int) -> tuple[DirichletCharacter, ...]:
    """Every character mod q (brute force; intended for q up to a few thousand)."""
    m = as_modulus(q)
    _, orders, logs = _group_structure(m.q)
    units = np.array([math.gcd(n, m.q) == 1 for n in range(m.q)])
    out = []
    for idx in np.ndindex(*orders) if orders else [()]:
        phase = np.zeros(m.q)
        for j, k in enumerate(idx):
            phase = phase + logs[:, j] * (k / orders[j])
        vals = np.where(units, np.exp(2j * np.pi * phase), 0.0)
        vals[~units] = 0.0
        # snap to exact roots of unity for the real cases
        vals = np.where(np.abs(vals.imag) < 1e-13, vals.real + 0j, vals)
        cond = _conductor(m.q, vals, units)
        prim = _primitive_table(m.q, cond, vals)
        out.append(DirichletCharacter(m.q, tuple(int(i) for i in idx), vals, cond, prim))
    return tuple(out)


def _conductor(q: int, vals: np.ndarray, units: np.ndarray) -> int:
    n = np.arange(q)
    for d in divisors(q):
        sel = units & (n % d == 1 % d)
        if np.allclose(vals[sel], 1.0):
            return d
    return q


def _primitive_table(q: int, d: int, vals: np.ndarray) -> np.ndarray:
    out = np.zeros(d, dtype=complex)
    for r in range(d):
        if math.gcd(r, d) != 1:
            continue
        x = r if r else d
        while math.gcd(x, q) != 1:
            x += d
        out[r] = vals[x % q]
    if d == 1:
        out[0] = 1.0
    return out


def gauss_sum(table: np.ndarray) -> complex:
    k = len(table)
    n = np.arange(k)
    return complex(np.sum(table * np.exp(2j * np.pi * n / k)))


def root_number(table: np.ndarray, parity: int) -> complex:
    """epsilon(chi) = tau(chi) / (i^a sqrt(k)) for a primitive character table."""
    k = len(table)
    if k == 1:
        return 1.0 + 0j
    a = 0 if parity > 0 else 1
    return gauss_sum(table) / (1j**a * math.sqrt(k))
