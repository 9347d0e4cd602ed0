"""General weighted races  sum_i alpha_i pi(x; q, a_i) > 0  with rational weights
summing to zero: the random-variable model, exact conductor-weighted variance,
and the bias / no-bias criteria."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import Modulus, _square_mask, as_modulus, divisors, von_mangoldt
from .characters import DirichletCharacter, dirichlet_group
from .dist import RaceModel, _tail_r4, density_fourier
from .lfunc import LFunction
from .zeros import cached_zeros

GENERAL_MODEL_MAX_Q = 100


class SpecError(ValueError):
    pass


def _as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, int):
        return Fraction(w)
    if isinstance(w, str):
        try:
            return Fraction(w.strip())
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"weight {w!r} is not a rational 'p/q'") from None
    if isinstance(w, float):
        # floats are accepted only when they are exactly representable dyadic rationals
        return Fraction(w)
    raise SpecError(f"unsupported weight type {type(w).__name__}")


def residue_flags(q: Modulus, classes: np.ndarray) -> np.ndarray:
    """epsilon_i = 1 for squares mod q (vectorized), 0 otherwise."""
    classes = np.asarray(classes, dtype=np.int64) % q.q
    if q.q <= 10**6:
        return _square_mask(q.q)[classes].astype(np.int8)
    ok = np.ones(classes.shape, dtype=bool)
    for p, e in q.factors:
        if p == 2:
            if e == 2:
                ok &= classes % 4 == 1
            elif e >= 3:
                ok &= classes % 8 == 1
        else:
            r = classes % p
            ok &= np.array([pow(int(x), (p - 1) // 2, p) == 1 for x in range(p)])[r]
    return ok.astype(np.int8)


@dataclass(frozen=True, eq=False)
class RaceSpec:
    """Classes a_i mod q with exact rational weights, stored as groups of equal weight."""

    q: Modulus
    groups: tuple  # ((Fraction, np.ndarray of classes), ...)
    _eps: tuple = field(repr=False, default=())

    def __post_init__(self):
        m = as_modulus(self.q)
        object.__setattr__(self, "q", m)
        groups = []
        for w, cl in self.groups:
            arr = np.asarray(cl, dtype=np.int64) % m.q
            arr.setflags(write=False)
            groups.append((_as_fraction(w), arr))
        object.__setattr__(self, "groups", tuple(groups))
        allc = self.classes
        if len(allc) < 2:
            raise SpecError("a race needs at least two classes")
        if len(np.unique(allc)) != len(allc):
            raise SpecError("classes must be distinct mod q")
        if np.any(np.gcd(allc, m.q) != 1):
            bad = int(allc[np.gcd(allc, m.q) != 1][0])
            raise SpecError(f"class {bad} is not invertible mod {m.q}")
        if self.total_weight != 0:
            raise SpecError(f"weights must sum to 0 (sum is {self.total_weight})")
        if all(w == 0 for w, _ in self.groups):
            raise SpecError("weights are all zero")
        object.__setattr__(self, "_eps", tuple(residue_flags(m, a) for _, a in self.groups))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_lists(cls, q, classes, weights) -> "RaceSpec":
        if len(classes) != len(weights):
            raise SpecError("classes and weights differ in length")
        return cls(as_modulus(q), tuple((w, [a]) for a, w in zip(classes, weights)))

    @classmethod
    def from_json(cls, data) -> "RaceSpec":
        if isinstance(data, (str, bytes)):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as e:
                raise SpecError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
        if not isinstance(data, dict):
            raise SpecError("spec must be a JSON object")
        for key in ("q", "classes", "weights"):
            if key not in data:
                raise SpecError(f"missing field '{key}'")
        q, cl, ws = data["q"], data["classes"], data["weights"]
        if not isinstance(q, int) or q < 3:
            raise SpecError("field 'q' must be an integer >= 3")
        if not isinstance(cl, list) or not all(isinstance(a, int) for a in cl):
            raise SpecError("field 'classes' must be a list of integers")
        if not isinstance(ws, list):
            raise SpecError("field 'weights' must be a list of 'p/q' strings")
        fr = [_as_fraction(w) for w in ws]
        if len(fr) != len(cl):
            raise SpecError("'classes' and 'weights' differ in length")
        grouped: dict[Fraction, list] = {}
        for a, w in zip(cl, fr):
            grouped.setdefault(w, []).append(a)
        return cls(as_modulus(q), tuple(grouped.items()))

    def to_json(self) -> dict:
        cl, ws = [], []
        for w, arr in self.groups:
            cl += [int(a) for a in arr]
            ws += [f"{w.numerator}/{w.denominator}"] * len(arr)
        return {"q": self.q.q, "classes": cl, "weights": ws}

    # -- aggregates -------------------------------------------------------

    @property
    def classes(self) -> np.ndarray:
        return np.concatenate([a for _, a in self.groups])

    @property
    def weights(self) -> list[Fraction]:
        out = []
        for w, a in self.groups:
            out += [w] * len(a)
        return out

    @property
    def eps(self) -> np.ndarray:
        return np.concatenate(self._eps)

    @property
    def k(self) -> int:
        return int(sum(len(a) for _, a in self.groups))

    @property
    def k_R(self) -> int:
        return int(sum(int(e.sum()) for e in self._eps))

    @property
    def total_weight(self) -> Fraction:
        return sum((w * len(a) for w, a in self.groups), Fraction(0))

    @property
    def sum_sq(self) -> Fraction:
        return sum((w * w * len(a) for w, a in self.groups), Fraction(0))

    @property
    def residue_weight(self) -> Fraction:
        """sum_i eps_i alpha_i."""
        return sum((w * int(e.sum()) for (w, _), e in zip(self.groups, self._eps)), Fraction(0))

    @property
    def symmetric(self) -> bool:
        return self.residue_weight == 0

    @property
    def normalized(self) -> bool:
        """True when sum eps_i alpha_i < 0, i.e. the race favours the non-residue side."""
        return self.residue_weight < 0

    def flipped(self) -> "RaceSpec":
        return RaceSpec(self.q, tuple((-w, a) for w, a in self.groups))

    def scaled(self, c) -> "RaceSpec":
        c = _as_fraction(c)
        if c <= 0:
            raise SpecError("scale must be positive")
        return RaceSpec(self.q, tuple((c * w, a) for w, a in self.groups))

    @property
    def mean(self) -> Fraction:
        return -self.q.rho * self.residue_weight


def nr_r_spec(q) -> RaceSpec:
    """The residue/non-residue race: weight 1/phi on non-residues, (1 - rho)/phi on residues."""
    m = as_modulus(q)
    units = np.nonzero(np.gcd(np.arange(m.q), m.q) == 1)[0]
    eps = residue_flags(m, units).astype(bool)
    phi = m.euler_phi
    return RaceSpec(m, ((Fraction(1, phi), units[~eps]), (Fraction(1 - m.rho, phi), units[eps])))


# ---------------------------------------------------------------------------
# characters and the model


def character_coefficient(spec: RaceSpec, chi: DirichletCharacter) -> float:
    """|sum_i alpha_i chi(a_i)|."""
    acc = 0j
    for w, a in spec.groups:
        acc += float(w) * complex(np.sum(chi.values[a]))
    return abs(acc)


@dataclass(frozen=True)
class _Prim:
    key: int | str
    lf: LFunction
    chi: DirichletCharacter | int


def _primitive(chi: DirichletCharacter) -> _Prim:
    d = chi.real_discriminant()
    if d is not None:
        return _Prim(d, LFunction.from_discriminant(d), d)
    cond = chi.conductor
    for psi in dirichlet_group(cond):
        if psi.conductor == cond and np.allclose(psi.values, chi.primitive_values, atol=1e-9):
            return _Prim(psi.label(), LFunction.from_character(psi), psi)
    raise AssertionError("inducing character not found")


def build_general_model(spec: RaceSpec, zeros: dict | None = None, T: float = 100.0,
                        max_q: int = GENERAL_MODEL_MAX_Q, use_cache: bool = True) -> RaceModel:
    """X = -rho(q) sum eps_i alpha_i + sum_{chi != chi0} |sum alpha_i chi(a_i)| sum_gamma 2 Re Z / sqrt(1/4+gamma^2).

    Needs zeros of complex characters too, so q is limited to max_q.
    """
    m = spec.q
    if m.q > max_q:
        raise SpecError(f"general-race models are limited to q <= {max_q} (zeros of all characters needed)")
    amps, parts = [], []
    pos = {}
    for chi in dirichlet_group(m.q):
        if chi.is_principal:
            continue
        c = character_coefficient(spec, chi)
        if c < 1e-12:
            continue
        pr = _primitive(chi)
        if zeros is not None:
            if pr.key not in zeros:
                raise KeyError(f"no zeros supplied for {pr.key}")
            zs = zeros[pr.key]
        else:
            zs = cached_zeros(pr.chi, T, use_cache=use_cache)
        if not zs.verified:
            raise ValueError(f"zeros for {pr.key} are not verified")
        g = zs.gammas
        amps.append(2 * c / np.sqrt(0.25 + g * g))
        P = float(np.sum(1.0 / (0.25 + g * g)))
        pos[pr.key] = P
        parts.append((chi, pr, c, zs.height))
    tail_var, r4, rmax, info = 0.0, 0.0, 0.0, []
    for chi, pr, c, h in parts:
        closed = pr.lf.zero_sum_closed_form()
        if pr.lf.is_real:
            tv = c * c * (closed - 2 * pos[pr.key])
        else:
            conj = _primitive(_conjugate(chi))
            # the pair chi, conj(chi) carries 2c^2 closed in total; half goes to each
            P_conj = pos.get(conj.key)
            if P_conj is None:
                raise AssertionError("conjugate character missing from the model")
            tv = c * c * (closed - pos[pr.key] - P_conj)
        tail_var += max(tv, 0.0)
        r4 += _tail_r4(c, pr.lf.k, h)
        rmax = max(rmax, 2 * c / math.sqrt(0.25 + h * h))
        info.append({"character": chi.label(), "primitive": pr.key, "coefficient": c, "tail": tv})
    heights = [p[3] for p in parts]
    return RaceModel(float(spec.mean), np.concatenate(amps) if amps else np.zeros(0), tail_var, r4, rmax,
                     m.q, min(heights) if heights else None, {"characters": info})


def _conjugate(chi: DirichletCharacter) -> DirichletCharacter:
    target = np.conj(chi.values)
    for psi in dirichlet_group(chi.modulus):
        if np.allclose(psi.values, target, atol=1e-9):
            return psi
    raise AssertionError


def general_density(spec: RaceSpec, T: float = 100.0, accuracy: float = 1e-6):
    return density_fourier(build_general_model(spec, T=T), accuracy)


# ---------------------------------------------------------------------------
# variance


def _phi_int(n: int) -> int:
    from .arith import euler_phi

    return euler_phi(n)


def exact_variance(spec: RaceSpec) -> float:
    """sum over characters of |sum alpha_i chi(a_i)|^2 log q*, in closed form:

    phi ||alpha||^2 (log q - sum_p log p/(p-1))
      - phi sum_{i != j} alpha_i alpha_j Lambda(q/(q, a_i/a_j - 1)) / phi(q/(q, a_i/a_j - 1)).
    """
    m = spec.q
    q = m.q
    if spec.k > 5000:
        raise SpecError("exact_variance is quadratic in the number of classes; k <= 5000")
    phi = m.euler_phi
    a = [int(x) for x in spec.classes]
    w = [float(x) for x in spec.weights]
    first = phi * float(spec.sum_sq) * (math.log(q) - math.fsum(math.log(p) / (p - 1) for p in m.primes))
    inv = [pow(x, -1, q) for x in a]
    terms = []
    cache: dict[int, float] = {}
    for i in range(len(a)):
        for j in range(len(a)):
            if i == j:
                continue
            g = math.gcd(q, (a[i] * inv[j] - 1) % q)
            n = q // g
            if n not in cache:
                cache[n] = von_mangoldt(n) / _phi_int(n) if n > 1 else 0.0
            if cache[n]:
                terms.append(w[i] * w[j] * cache[n])
    return first - phi * math.fsum(terms)


def exact_variance_bruteforce(spec: RaceSpec) -> float:
    """The same quantity by summing over the full character table."""
    tot = []
    for chi in dirichlet_group(spec.q.q):
        if chi.is_principal:
            continue
        c = character_coefficient(spec, chi)
        tot.append(c * c * math.log(chi.conductor))
    return math.fsum(tot)


@dataclass(frozen=True)
class VarianceBounds:
    lower: float  # phi ||alpha||^2 log(3 phi / k), up to an unspecified constant
    upper: float  # phi ||alpha||^2 log q
    value: float  # conductor-weighted variance
    ratio_lower: float
    ratio_upper: float


def variance_bounds(spec: RaceSpec) -> VarianceBounds:
    """Shape bounds phi ||alpha||^2 log(3 phi/k) << V << phi ||alpha||^2 log q."""
    m = spec.q
    phi = m.euler_phi
    n2 = float(spec.sum_sq)
    lo = phi * n2 * math.log(3 * phi / spec.k)
    hi = phi * n2 * math.log(m.q)
    v = exact_variance(spec)
    return VarianceBounds(lo, hi, v, v / lo, v / hi)


# ---------------------------------------------------------------------------
# criteria


@dataclass(frozen=True)
class Verdict:
    name: str
    holds: bool
    lhs: float
    rhs: float
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_json(self) -> dict:
        d = {"name": self.name, "holds": self.holds, "lhs": self.lhs, "rhs": self.rhs}
        d.update(self.details)
        return d


def check_bias_criterion(spec: RaceSpec, epsilon: float, c: float = 1.0, model: RaceModel | None = None) -> Verdict:
    """sum alpha^2 / (sum eps alpha)^2 < epsilon rho^2 / (phi log q)  implies  delta > 1 - c epsilon."""
    s = spec.residue_weight
    if s == 0:
        raise SpecError("sum eps_i alpha_i = 0: the race is symmetric (delta = 1/2)")
    m = spec.q
    lhs = float(spec.sum_sq / (s * s))
    rhs = epsilon * m.rho**2 / (m.euler_phi * math.log(m.q))
    holds = lhs < rhs
    det = {
        "epsilon": epsilon,
        "cauchy_schwarz_floor": 1.0 / spec.k_R if spec.k_R else math.inf,
        "floor_ok": spec.k_R == 0 or lhs >= 1.0 / spec.k_R - 1e-12,
        "orientation": "non-residues ahead" if s < 0 else "residues ahead",
    }
    if holds:
        det["density_lower_shape"] = 1.0 - c * epsilon
    if model is not None:
        from .dist import chebyshev_lower_bound

        det["chebyshev_lower_bound"] = chebyshev_lower_bound(model)
    return Verdict("bias_criterion", holds, lhs, rhs, det)


def constant_coefficient_spec(q, k_N: int, k_R: int) -> RaceSpec:
    """alpha = k_R on the first k_N non-residues and -k_N on the first k_R residues."""
    m = as_modulus(q)
    units = np.nonzero(np.gcd(np.arange(m.q), m.q) == 1)[0]
    eps = residue_flags(m, units).astype(bool)
    nr, r = units[~eps], units[eps]
    if k_N > len(nr) or k_R > len(r):
        raise SpecError("not enough classes")
    return RaceSpec(m, ((Fraction(k_R), nr[:k_N]), (Fraction(-k_N), r[:k_R])))


def admissible_pairs(q, epsilon: float) -> int:
    """N_eps(q): number of (k_N, k_R) in the allowed box with 1/k_N + 1/k_R < eps rho^2/(phi log q)."""
    m = as_modulus(q)
    R = epsilon * m.rho**2 / (m.euler_phi * math.log(m.q))
    kN_max = m.euler_phi - m.euler_phi // m.rho
    kR_max = m.euler_phi // m.rho
    total = 0
    for kR in range(1, kR_max + 1):
        rest = R - 1.0 / kR
        if rest <= 0:
            continue
        # need 1/k_N < rest, i.e. k_N > 1/rest
        lo = math.floor(1.0 / rest) + 1
        if lo <= kN_max:
            total += kN_max - lo + 1
    return total


def check_constant_coefficient_race(q, k_N: int, k_R: int, epsilon: float) -> Verdict:
    m = as_modulus(q)
    if not (1 <= k_R <= m.euler_phi // m.rho):
        raise SpecError(f"k_R must be in [1, phi/rho] = [1, {m.euler_phi // m.rho}]")
    if not (1 <= k_N <= m.euler_phi - m.euler_phi // m.rho):
        raise SpecError("k_N exceeds the number of non-residues")
    lhs = 1.0 / k_N + 1.0 / k_R
    rhs = epsilon * m.rho**2 / (m.euler_phi * math.log(m.q))
    det = {"k_N": k_N, "k_R": k_R, "epsilon": epsilon, "admissible_pairs": admissible_pairs(m, epsilon)}
    if k_N + k_R <= 10**5:
        spec = constant_coefficient_spec(m, k_N, k_R)
        det["weights_sum"] = str(spec.total_weight)
        det["direct"] = check_bias_criterion(spec, epsilon).holds
    return Verdict("constant_coefficient", lhs < rhs, lhs, rhs, det)


def check_limitation(spec: RaceSpec, K1: float = 1.0, K2: float = 1.0) -> Verdict:
    """Hypothesis (sum eps alpha)^2 / sum alpha^2 <= K2 phi log(3 phi/k) / rho^2 (with k <= K1 phi):
    when it holds the race cannot be highly biased."""
    m = spec.q
    phi = m.euler_phi
    if spec.k > K1 * phi:
        raise SpecError("k exceeds K1 phi(q)")
    lhs = float(spec.residue_weight**2 / spec.sum_sq)
    rhs = K2 * phi * math.log(3 * phi / spec.k) / m.rho**2
    holds = lhs <= rhs
    det = {
        "K1": K1,
        "K2": K2,
        "k_R": spec.k_R,
        "phi_over_rho_sq": phi / m.rho**2,
        "conclusion": "cannot be highly biased (up to an unspecified eta)" if holds else "no conclusion",
    }
    return Verdict("limitation", holds, lhs, rhs, det)


def primitive_count(d: int) -> int:
    """Number of primitive characters mod d."""
    out = 1
    from .arith import factorize

    for p, e in factorize(d):
        if e == 1:
            out *= p - 2
        else:
            out *= p**e - 2 * p ** (e - 1) + p ** (e - 2)
    return out


@dataclass(frozen=True)
class SmallConductorCount:
    count: int
    bound: int


def small_conductor_count(q, L: int) -> SmallConductorCount:
    """#{chi mod q : conductor <= L} and the bound min(L tau(q), L^2)."""
    m = as_modulus(q)
    if not (1 <= L <= m.euler_phi):
        raise ValueError("need 1 <= L <= phi(q)")
    ds = divisors(m.q)
    count = sum(primitive_count(d) for d in ds if d <= L)
    bound = min(L * len(ds), L * L)
    assert count <= bound
    return SmallConductorCount(count, bound)


def clt_error_diagnostic(spec: RaceSpec) -> float:
    """min{1, k^2 log q / (phi log(3 phi / k))}, the shape of the general CLT error term."""
    m = spec.q
    phi = m.euler_phi
    return min(1.0, spec.k**2 * math.log(m.q) / (phi * math.log(3 * phi / spec.k)))
