"""Zeros of L-functions on the critical line: search, verification, file I/O,
caching, and sums over zeros."""
from __future__ import annotations

import logging
import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .characters import DirichletCharacter, RealCharacter
from .lfunc import AccuracyError, LFunction

log = logging.getLogger(__name__)

DEFAULT_HEIGHT = 200.0
CACHE_ENV = "BIASRACE_CACHE_DIR"


class ZeroFileError(ValueError):
    pass


class MultipleZeroError(ValueError):
    """Two ordinates coincide: a multiplicity > 1, which the race model excludes."""


@dataclass(frozen=True, eq=False)
class ZeroSet:
    """Positive ordinates 0 < gamma <= height of one primitive L-function."""

    key: int | str  # fundamental discriminant, or a character label for complex characters
    height: float
    gammas: np.ndarray = field(repr=False)
    source: str = "computed"
    verified: bool = False
    expected: int | None = None
    diagnostics: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        if g.size and (g[0] <= 0 or np.any(np.diff(g) <= 0)):
            raise ValueError("ordinates must be positive and strictly increasing")
        g.setflags(write=False)
        object.__setattr__(self, "gammas", g)

    @property
    def discriminant(self) -> int | None:
        return self.key if isinstance(self.key, int) else None

    def __len__(self):
        return len(self.gammas)

    def truncate(self, T: float) -> "ZeroSet":
        if T > self.height:
            raise ValueError(f"zeros only known to {self.height}")
        g = self.gammas[self.gammas <= T]
        return ZeroSet(self.key, T, g, self.source, self.verified, len(g) if self.verified else None,
                       dict(self.diagnostics))


# ---------------------------------------------------------------------------
# search


def _spacing(k: int, t: float) -> float:
    return 2 * math.pi / math.log(max(k * max(t, 1.0) / (2 * math.pi), math.e))


class _Search:
    def __init__(self, lf: LFunction, step_factor: float = 0.25):
        self.lf = lf
        self.f = step_factor
        self.evals = 0

    def Z(self, t):
        self.evals += 1
        return self.lf.hardy(t)

    def grid(self, lo, hi, factor=None):
        f = self.f if factor is None else factor
        ts = [lo]
        t = lo
        while t < hi:
            t = min(hi, t + f * _spacing(self.lf.k, t))
            ts.append(t)
        return np.array(ts)

    def roots_on(self, ts, zs=None):
        if zs is None:
            zs = np.array([self.Z(t) for t in ts])
        roots = []
        for i in range(len(ts) - 1):
            if zs[i] == 0.0:
                roots.append(ts[i])
            elif zs[i] * zs[i + 1] < 0:
                roots.append(brentq(self.Z, ts[i], ts[i + 1], xtol=1e-11, rtol=1e-15))
        # local minima of |Z| without a sign change may hide a close pair
        for i in range(1, len(ts) - 1):
            a, b, c = zs[i - 1], zs[i], zs[i + 1]
            if a * b > 0 and b * c > 0 and abs(b) < abs(a) and abs(b) < abs(c):
                roots.extend(self._probe_pair(ts[i - 1], ts[i + 1], np.sign(b)))
        return sorted(roots), zs

    def _probe_pair(self, lo, hi, sgn):
        res = minimize_scalar(lambda t: sgn * self.Z(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        if res.fun >= 0:
            return []
        m = res.x
        return [brentq(self.Z, lo, m, xtol=1e-11, rtol=1e-15), brentq(self.Z, m, hi, xtol=1e-11, rtol=1e-15)]


def _coerce(chi) -> tuple[LFunction, int | str]:
    if isinstance(chi, RealCharacter):
        if chi.is_principal:
            raise ValueError("the principal character has no zeros in the race model")
        if not chi.is_primitive:
            raise ValueError(
                f"character mod {chi.modulus} is induced from conductor {chi.conductor}; "
                "search the primitive character instead"
            )
        return LFunction.from_discriminant(chi.discriminant), chi.discriminant
    if isinstance(chi, DirichletCharacter):
        if chi.conductor != chi.modulus:
            raise ValueError("character is not primitive")
        lf = LFunction.from_character(chi)
        d = chi.real_discriminant()
        return lf, (d if d is not None else chi.label())
    if isinstance(chi, LFunction):
        return chi, chi.label
    d = int(chi)
    return LFunction.from_discriminant(d), d


def find_zeros(chi, T: float, step_factor: float = 0.25) -> ZeroSet:
    """All zeros with 0 < gamma <= T, located by sign changes of the Hardy function.

    The count is checked against the argument principle at a height T_v >= T
    chosen where |Z| is large.  Mismatches are localized by counting at
    intermediate heights and the offending stretch is rescanned on a finer grid.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    lf, key = _coerce(chi)
    S = _Search(lf, step_factor)
    ts = S.grid(0.0, T)
    # extend past T and stop at the largest |Z| of the next few grid points
    ext = S.grid(T, T + 8 * step_factor * _spacing(lf.k, T))[1:]
    zs_main = np.array([S.Z(t) for t in ts])
    zs_ext = np.array([S.Z(t) for t in ext])
    j = int(np.argmax(np.abs(zs_ext)))
    ts = np.concatenate([ts, ext[: j + 1]])
    zs = np.concatenate([zs_main, zs_ext[: j + 1]])
    Tv = float(ts[-1])
    roots, _ = S.roots_on(ts, zs)
    roots = _dedupe(roots)

    raw = lf.count_zeros_raw(Tv)
    expected = int(round(raw))
    diag = {"verify_height": Tv, "count_raw": raw, "grid_points": len(ts)}
    if abs(raw - expected) > 0.25:
        diag["note"] = "argument-principle count not near an integer"
    if len(roots) != expected:
        roots = _repair(S, roots, Tv, expected, diag)
    verified = len(roots) == expected and "note" not in diag
    diag["evaluations"] = S.evals
    g = np.array([r for r in roots if r <= T])
    if not verified:
        log.warning("zero set %s to T=%s unverified: found %d, expected %d", key, T, len(roots), expected)
    return ZeroSet(key, float(T), g, "computed", verified, len(g) if verified else None, diag)


def _dedupe(roots):
    out = []
    for r in sorted(roots):
        if out and abs(r - out[-1]) < 1e-9:
            continue
        out.append(r)
    return out


def _repair(S: _Search, roots, Tv, expected, diag, depth=0):
    """Localize count mismatches by bisection on argument-principle counts and rescan."""
    lf = S.lf
    pieces = [(0.0, Tv, 0, expected)]
    fixed = list(roots)
    for _ in range(60):
        todo = []
        for lo, hi, nlo, nhi in pieces:
            have = sum(1 for r in fixed if lo < r <= hi)
            if have == nhi - nlo:
                continue
            inside = [r for r in fixed if lo < r <= hi]
            if len(inside) <= 4 or hi - lo < 4 * _spacing(lf.k, hi):
                ts = S.grid(lo, hi, factor=S.f / 16)
                new, _ = S.roots_on(ts)
                fixed = _dedupe([r for r in fixed if not (lo < r <= hi)] + new)
                have = sum(1 for r in fixed if lo < r <= hi)
                if have != nhi - nlo:
                    diag.setdefault("unresolved", []).append((lo, hi, have, nhi - nlo))
                continue
            # split at the midpoint between two found zeros near the middle
            i = len(inside) // 2
            mid = 0.5 * (inside[i - 1] + inside[i])
            try:
                nmid = lf.count_zeros(mid)
            except AccuracyError:
                mid = 0.25 * inside[i - 1] + 0.75 * inside[i]
                nmid = lf.count_zeros(mid)
            todo += [(lo, mid, nlo, nmid), (mid, hi, nmid, nhi)]
        if not todo:
            break
        pieces = todo
    diag["repaired"] = True
    return fixed


# ---------------------------------------------------------------------------
# files and cache


def save_zeros(zs: ZeroSet, path) -> None:
    path = Path(path)
    lines = []
    if isinstance(zs.key, int):
        lines.append(f"# d {zs.key}")
    else:
        lines.append(f"# label {zs.key}")
    lines.append(f"# T {format(zs.height, '.17g')}")
    lines.append(f"# verified {int(zs.verified)}")
    lines += [format(float(g), ".17g") for g in zs.gammas]
    tmp = path.with_name(path.name + ".part")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_zeros(path, expect_key=None, verify: bool = False) -> ZeroSet:
    """Read a zero file.  Unsorted input is sorted with a warning; duplicates are errors."""
    key, T, verified = None, None, False
    gs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                parts = s[1:].split()
                if len(parts) >= 2 and parts[0] == "d":
                    key = _parse(int, parts[1], path, lineno)
                elif len(parts) >= 2 and parts[0] == "label":
                    key = parts[1]
                elif len(parts) >= 2 and parts[0] == "T":
                    T = _parse(float, parts[1], path, lineno)
                elif len(parts) >= 2 and parts[0] == "verified":
                    verified = parts[1] == "1"
                continue
            g = _parse(float, s, path, lineno)
            if not (g > 0 and math.isfinite(g)):
                raise ZeroFileError(f"{path}:{lineno}: ordinate must be positive, got {s!r}")
            gs.append(g)
    if key is None:
        raise ZeroFileError(f"{path}: missing '# d <discriminant>' header")
    if expect_key is not None and key != expect_key:
        raise ZeroFileError(f"{path}: header is for {key}, expected {expect_key}")
    arr = np.array(gs, dtype=float)
    if arr.size > 1 and np.any(np.diff(arr) < 0):
        warnings.warn(f"{path}: ordinates not sorted; sorting", stacklevel=2)
        arr = np.sort(arr)
    if arr.size > 1 and np.any(np.diff(arr) == 0):
        dup = arr[1:][np.diff(arr) == 0][0]
        raise MultipleZeroError(f"{path}: repeated ordinate {dup!r} (multiple zero)")
    if T is None:
        T = float(arr[-1]) if arr.size else 0.0
    zs = ZeroSet(key, T, arr, "file", False)
    if verify:
        zs = verify_zero_set(zs)
    elif verified:
        zs = ZeroSet(key, T, arr, "file", True, len(arr))
    return zs


def _parse(tp, text, path, lineno):
    try:
        return tp(text)
    except ValueError:
        raise ZeroFileError(f"{path}:{lineno}: cannot parse {text!r}") from None


def verify_zero_set(zs: ZeroSet) -> ZeroSet:
    """Compare the number of ordinates with the argument-principle count at the height."""
    if not isinstance(zs.key, int):
        raise ValueError("only real characters can be verified from a file")
    lf = LFunction.from_discriminant(zs.key)
    try:
        n = lf.count_zeros(zs.height)
    except AccuracyError:
        n = None
    ok = n is not None and n == len(zs)
    return ZeroSet(zs.key, zs.height, zs.gammas, zs.source, ok, n, {"count": n})


def cache_dir() -> Path:
    p = os.environ.get(CACHE_ENV)
    base = Path(p) if p else Path.home() / ".cache" / "biasrace"
    base.mkdir(parents=True, exist_ok=True)
    return base


def _cache_name(key) -> str:
    if isinstance(key, int):
        return f"d{'m' if key < 0 else 'p'}{abs(key)}"
    return "c" + str(key).replace(".", "_")


def cached_zeros(chi, T: float = DEFAULT_HEIGHT, use_cache: bool = True) -> ZeroSet:
    """find_zeros with a file cache keyed by (|d|, sign); any cached height >= T is reused."""
    lf, key = _coerce(chi)
    if not use_cache:
        return find_zeros(lf if not isinstance(key, int) else key, T)
    d = cache_dir()
    name = _cache_name(key)
    best = None
    for f in d.glob(name + "_T*.zeros"):
        try:
            h = float(f.stem.split("_T", 1)[1])
        except ValueError:
            continue
        if h >= T and (best is None or h < best[0]):
            best = (h, f)
    if best is not None:
        try:
            zs = load_zeros(best[1], expect_key=key)
            if zs.verified:
                return zs.truncate(T)
        except (ZeroFileError, MultipleZeroError):
            pass
    zs = find_zeros(lf if not isinstance(key, int) else key, T)
    if zs.verified:
        save_zeros(zs, d / f"{name}_T{format(T, 'g')}.zeros")
    return zs


# ---------------------------------------------------------------------------
# sums over zeros


def tail_sum(lf: LFunction, f, T: float, count: int, fprime=None) -> tuple[float, float]:
    """Estimate sum_{gamma > T} f(gamma) for positive ordinates.

    Stieltjes integral against N(t) = smooth(t) + S(t), integrated by parts:
    int_T^inf f theta'/pi dt - f(T) S(T), where S(T) comes from the actual count.
    The neglected term int f' S is O(|f'(T)| log(kT)); that is the returned bound.
    """
    main, _ = quad(lambda t: f(t) * lf.theta_prime(t) / math.pi, T, np.inf, limit=200, epsabs=1e-15)
    s_T = count - lf.smooth_count(T) - (1.0 if lf.is_zeta else 0.0)
    est = main - f(T) * s_T
    if fprime is None:
        h = 1e-4 * max(1.0, T)
        fprime = lambda t: (f(t + h) - f(t - h)) / (2 * h)  # noqa: E731
    bound = abs(fprime(T)) * (1.0 + math.log(lf.k * max(T, 2.0)))
    return est, bound


@dataclass(frozen=True)
class ZeroSumResult:
    closed_form: float
    truncated: float
    tail: float
    tail_bound: float

    @property
    def from_zeros(self) -> float:
        return self.truncated + self.tail

    @property
    def discrepancy(self) -> float:
        return abs(self.closed_form - self.from_zeros)

    @property
    def consistent(self) -> bool:
        return self.discrepancy <= max(self.tail_bound, 1e-9 * abs(self.closed_form))


def zero_sum_quarter(chi, zeros: ZeroSet) -> ZeroSumResult:
    """sum over all zeros of 1/(1/4 + gamma^2) for a real primitive character, two ways.

    (a) closed form through L'/L(1); (b) twice the positive ordinates up to T plus
    twice the integral tail estimate.
    """
    lf, _ = _coerce(chi)
    if not lf.is_real or lf.is_zeta:
        raise ValueError("zero_sum_quarter needs a non-principal real character")
    g = zeros.gammas
    f = lambda t: 1.0 / (0.25 + t * t)  # noqa: E731
    fp = lambda t: -2 * t / (0.25 + t * t) ** 2  # noqa: E731
    trunc = 2.0 * float(np.sum(f(g)))
    tail, bound = tail_sum(lf, f, zeros.height, len(g), fp)
    res = ZeroSumResult(lf.zero_sum_closed_form(), trunc, 2 * tail, 2 * bound)
    if not res.consistent:
        log.warning("zero sum for %s disagrees with closed form by %.3g (bound %.3g); missing zeros?",
                    zeros.key, res.discrepancy, res.tail_bound)
    return res


@dataclass(frozen=True)
class InverseSqrtSum:
    T: float
    exact: float
    main_term: float

    @property
    def ratio(self) -> float:
        return self.exact / self.main_term if self.main_term else math.nan


def partial_sum_inverse_sqrt(zeros: ZeroSet, T: float, conductor: int | None = None) -> InverseSqrtSum:
    """sum_{|gamma| < T} 1/sqrt(1/4 + gamma^2) counting both signs, and the main term
    (1/pi) log(q* sqrt(T)) log T."""
    if T > zeros.height:
        raise ValueError(f"zeros only known to height {zeros.height}, need {T}")
    k = conductor if conductor is not None else abs(zeros.discriminant or 1)
    g = zeros.gammas[zeros.gammas < T]
    exact = 2.0 * float(np.sum(1.0 / np.sqrt(0.25 + g * g)))
    main = math.log(k * math.sqrt(T)) * math.log(T) / math.pi if T > 1 else 0.0
    return InverseSqrtSum(T, exact, main)
