"""Ground truth from the primes: a segmented sieve, race counts at a geometric
checkpoint grid, the normalized error E_q(x), empirical logarithmic densities,
Skewes-point search and a comparison against the explicit formula."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .arith import Modulus, as_modulus
from .characters import enumerate_real_characters
from .general import residue_flags

X_MAX_LIMIT = 10**10
SEGMENT_BYTES = 1 << 18
CLASS_COLUMNS_MAX = 64


@numba.njit(cache=True)
def _base_primes(n):
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(n + 1, dtype=np.bool_)
    mark[0] = False
    mark[1] = False
    i = 2
    while i * i <= n:
        if mark[i]:
            mark[i * i :: i] = False
        i += 1
    return np.nonzero(mark)[0].astype(np.int64)


@numba.njit(cache=True)
def _scan(x_max, q, slot, wa, wb, checkpoints, base, seg, track, stop_early,
          out_slots, out_pi, first):
    """Walk the primes <= x_max in order.

    slot[a]: column of residue class a (-1 if not invertible).
    wa, wb: integer weights per class; the first x where sum w_a pi(x;q,a) < 0
    is recorded in first[0] / first[1].
    out_slots[j, c]: count of class c at checkpoint j (only if track).
    out_pi[j]: pi(x) at checkpoint j.
    """
    nslots = out_slots.shape[1]
    counts = np.zeros(nslots, dtype=np.int64)
    A = 0
    B = 0
    pi = 0
    nck = checkpoints.shape[0]
    jc = 0
    first[0] = -1
    first[1] = -1
    # p = 2 first, then odd numbers segment by segment
    p = 2
    if p <= x_max:
        while jc < nck and checkpoints[jc] < p:
            out_pi[jc] = pi
            if track:
                for c in range(nslots):
                    out_slots[jc, c] = counts[c]
            jc += 1
        pi += 1
        r = p % q
        s = slot[r]
        if s >= 0:
            counts[s] += 1
            A += wa[r]
            B += wb[r]
            if first[0] < 0 and A < 0:
                first[0] = p
            if first[1] < 0 and B < 0:
                first[1] = p
    sieve = np.empty(seg, dtype=np.bool_)
    lo = 3  # odd numbers lo, lo+2, ..., lo + 2(seg-1)
    nb = base.shape[0]
    done = False
    while lo <= x_max and not done:
        hi = lo + 2 * seg  # exclusive
        sieve[:] = True
        for ib in range(1, nb):  # skip 2
            bp = base[ib]
            if bp * bp >= hi:
                break
            start = bp * bp
            if start < lo:
                start = ((lo + bp - 1) // bp) * bp
                if start % 2 == 0:
                    start += bp
            for m in range((start - lo) // 2, seg, bp):
                sieve[m] = False
        for i in range(seg):
            if not sieve[i]:
                continue
            p = lo + 2 * i
            if p > x_max:
                done = True
                break
            while jc < nck and checkpoints[jc] < p:
                out_pi[jc] = pi
                if track:
                    for c in range(nslots):
                        out_slots[jc, c] = counts[c]
                jc += 1
            pi += 1
            r = p % q
            s = slot[r]
            if s >= 0:
                counts[s] += 1
                A += wa[r]
                B += wb[r]
                if first[0] < 0 and A < 0:
                    first[0] = p
                if first[1] < 0 and B < 0:
                    first[1] = p
            if stop_early and first[0] >= 0 and first[1] >= 0:
                done = True
                break
        lo = hi
    while jc < nck:
        out_pi[jc] = pi
        if track:
            for c in range(nslots):
                out_slots[jc, c] = counts[c]
        jc += 1
    return counts


def _check_xmax(x_max) -> int:
    x = int(round(float(x_max)))
    if x < 1:
        raise ValueError("x_max must be positive")
    if x > X_MAX_LIMIT:
        raise ValueError(f"x_max={x:.3g} beyond desk scale (limit 1e10)")
    return x


def geometric_grid(x_max: int, ratio: float = 1.001, start: int = 2) -> np.ndarray:
    if not (1.0 < ratio <= 1.01):
        raise ValueError("grid ratio must lie in (1, 1.01]")
    if x_max < start:
        return np.array([x_max], dtype=np.int64)
    n = int(math.floor(math.log(x_max / start) / math.log(ratio)))
    g = np.floor(start * ratio ** np.arange(n + 1)).astype(np.int64)
    g = np.unique(np.append(g, x_max))
    return g[g <= x_max]


def _classes(q: Modulus):
    units = np.nonzero(np.gcd(np.arange(q.q), q.q) == 1)[0].astype(np.int64)
    eps = residue_flags(q, units).astype(bool)
    return units, eps


@dataclass
class RaceTrace:
    q: Modulus
    checkpoints: np.ndarray
    pi_nr: np.ndarray
    pi_r: np.ndarray
    pi_all: np.ndarray
    classes: np.ndarray | None = None  # class representatives, when per-class counts are kept
    counts: np.ndarray | None = None  # shape (n_checkpoints, n_classes)
    crossings: dict = field(default_factory=dict)

    @property
    def x_max(self) -> int:
        return int(self.checkpoints[-1])

    @property
    def e_values(self) -> np.ndarray:
        """(pi(x;q,NR) - (rho-1) pi(x;q,R)) / (sqrt(x)/log x)."""
        x = self.checkpoints.astype(float)
        num = self.pi_nr - (self.q.rho - 1) * self.pi_r
        with np.errstate(divide="ignore", invalid="ignore"):
            e = num * np.log(x) / np.sqrt(x)
        return np.where(x > 1, e, 0.0)

    def plot_data(self):
        return self.checkpoints.astype(float), self.e_values

    def log_weights(self) -> np.ndarray:
        """Log-length of [x_j, x_{j+1}) attributed to checkpoint j (last one gets 0)."""
        lx = np.log(self.checkpoints.astype(float))
        return np.append(np.diff(lx), 0.0)

    def to_csv(self, path) -> None:
        head = ["x"]
        if self.classes is not None:
            head += [f"pi_{int(a)}" for a in self.classes]
        head += ["pi_NR", "pi_R", "E"]
        e = self.e_values
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(head)
            for j, x in enumerate(self.checkpoints):
                row = [int(x)]
                if self.counts is not None:
                    row += [int(c) for c in self.counts[j]]
                row += [int(self.pi_nr[j]), int(self.pi_r[j]), f"{e[j]:.12g}"]
                w.writerow(row)


def _weights(q: Modulus, units, eps):
    """Integer weights for the two crossing inequalities.

    displayed:  (rho-1) pi(NR) < pi(R)
    normalized: pi(NR) < (rho-1) pi(R)   (i.e. E_q < 0)
    """
    r1 = q.rho - 1
    wa = np.zeros(q.q, dtype=np.int64)
    wb = np.zeros(q.q, dtype=np.int64)
    wa[units[~eps]] = r1
    wa[units[eps]] = -1
    wb[units[~eps]] = 1
    wb[units[eps]] = -r1
    return wa, wb


def _run(q: Modulus, x_max: int, checkpoints, track: bool, stop_early: bool, wa=None, wb=None):
    units, eps = _classes(q)
    slot = np.full(q.q, -1, dtype=np.int64)
    slot[units] = np.arange(len(units))
    if wa is None:
        wa, wb = _weights(q, units, eps)
    base = _base_primes(int(math.isqrt(x_max)) + 1)
    nck = len(checkpoints)
    out_slots = np.zeros((nck if track else 0, len(units)), dtype=np.int64)
    out_pi = np.zeros(nck, dtype=np.int64)
    first = np.zeros(2, dtype=np.int64)
    _scan(x_max, q.q, slot, wa, wb, np.asarray(checkpoints, dtype=np.int64), base, SEGMENT_BYTES,
          track, stop_early, out_slots, out_pi, first)
    return units, eps, out_slots, out_pi, first


def sieve_race(q, x_max, grid: float = 1.001, keep_classes: bool | None = None) -> RaceTrace:
    """Race counts pi(x;q,NR), pi(x;q,R) at a geometric grid of checkpoints up to x_max.

    Per-class counts are kept when phi(q) is small enough for a CSV column each.
    """
    m = as_modulus(q)
    if m.q < 3:
        raise ValueError("q must be at least 3 (the group mod 1 or 2 has no race)")
    xm = _check_xmax(x_max)
    chk = geometric_grid(xm, grid)
    if keep_classes is None:
        keep_classes = m.euler_phi <= CLASS_COLUMNS_MAX
    units, eps = _classes(m)
    # per-class columns are always needed for the NR/R split; drop them afterwards if not kept
    _, _, slots, pi, first = _run(m, xm, chk, True, False)
    nr = slots[:, ~eps].sum(axis=1)
    rr = slots[:, eps].sum(axis=1)
    cross = {"displayed": int(first[0]) if first[0] > 0 else None,
             "normalized": int(first[1]) if first[1] > 0 else None}
    return RaceTrace(m, chk, nr, rr, pi, units if keep_classes else None, slots if keep_classes else None, cross)


@dataclass(frozen=True)
class SkewesResult:
    q: int
    x_max: int
    displayed: int | None  # first x with (rho-1) pi(x;q,NR) < pi(x;q,R)
    normalized: int | None  # first x with pi(x;q,NR) < (rho-1) pi(x;q,R)

    def to_json(self) -> dict:
        return {"q": self.q, "x_max": self.x_max, "displayed_inequality": self.displayed,
                "normalized_inequality": self.normalized}


def skewes_search(q, x_max) -> SkewesResult:
    """Streaming search, prime by prime, for the first x where the underdog (residues)
    leads. Both readings of the weight placement are reported; they coincide when rho = 2."""
    m = as_modulus(q)
    if m.q < 3:
        raise ValueError("q must be at least 3")
    xm = _check_xmax(x_max)
    _, _, _, _, first = _run(m, xm, np.zeros(0, dtype=np.int64), False, True)
    return SkewesResult(m.q, xm, int(first[0]) if first[0] > 0 else None, int(first[1]) if first[1] > 0 else None)


def first_lead_change(q, a: int, b: int, x_max) -> int | None:
    """First prime x with pi(x;q,a) > pi(x;q,b)."""
    m = as_modulus(q)
    xm = _check_xmax(x_max)
    if math.gcd(a, m.q) != 1 or math.gcd(b, m.q) != 1 or (a - b) % m.q == 0:
        raise ValueError("need two distinct invertible classes")
    wa = np.zeros(m.q, dtype=np.int64)
    wa[a % m.q] = -1
    wa[b % m.q] = 1
    _, _, _, _, first = _run(m, xm, np.zeros(0, dtype=np.int64), False, True, wa, wa.copy())
    return int(first[0]) if first[0] > 0 else None


def log_density_estimate(trace: RaceTrace, predicate=None, x_min: float = 2) -> float:
    """Fraction of log-measure of [x_min, x_max] on which the predicate holds.

    The predicate gets the trace and returns a boolean array over checkpoints;
    the default is E_q > 0 (ties do not count). Each interval between
    checkpoints takes the state at its left end.
    """
    if predicate is None:
        mask = trace.e_values > 0
    else:
        mask = np.asarray(predicate(trace), dtype=bool)
    w = np.where(trace.checkpoints >= x_min, trace.log_weights(), 0.0)
    tot = w.sum()
    if tot <= 0:
        return float(mask[0]) if len(mask) else 0.0
    return float(w[mask].sum() / tot)


@dataclass(frozen=True)
class TraceMoments:
    mean: float
    variance: float
    expected_mean: float
    span: float  # log-length Y of the integration window

    @property
    def mean_relative_error(self) -> float:
        return abs(self.mean - self.expected_mean) / abs(self.expected_mean)


def trace_moments(trace: RaceTrace, x_min: float = 2) -> TraceMoments:
    """(1/Y) int E_q(e^y) dy and the matching second central moment over the log grid,
    restricted to x >= x_min."""
    w = np.where(trace.checkpoints >= x_min, trace.log_weights(), 0.0)
    e = trace.e_values
    Y = w.sum()
    mu = float(np.dot(w, e) / Y)
    var = float(np.dot(w, (e - mu) ** 2) / Y)
    return TraceMoments(mu, var, trace.q.rho - 1.0, float(Y))


@dataclass
class ExplicitFormulaReport:
    T: float
    max_dev: dict  # height -> max |E - truncated formula|
    mean_dev: dict
    x_min: float

    def shrinks(self) -> bool:
        hs = sorted(self.mean_dev)
        return all(self.mean_dev[a] > self.mean_dev[b] for a, b in zip(hs, hs[1:]))


def explicit_formula_values(q, x, zero_sets, T: float) -> np.ndarray:
    """rho(q) - 1 + sum over real chi != chi0 of sum_{|gamma| <= T} x^{i gamma}/(1/2 + i gamma)."""
    m = as_modulus(q)
    lx = np.log(np.asarray(x, dtype=float))
    out = np.full(lx.shape, m.rho - 1.0)
    for zs in zero_sets:
        g = zs.gammas[zs.gammas <= T]
        if len(g) == 0:
            continue
        # the conjugate zero -gamma doubles the real part
        for chunk in np.array_split(g, max(1, len(g) // 256)):
            ph = np.exp(1j * np.outer(lx, chunk))
            out += 2 * (ph / (0.5 + 1j * chunk)).real.sum(axis=1)
    return out


def explicit_formula_check(trace: RaceTrace, zeros: dict | None = None, T: float = 100.0,
                           x_min: float = 100.0, use_cache: bool = True) -> ExplicitFormulaReport:
    """Compare E_q at the checkpoints with the zero sum truncated at T and at 2T."""
    from .zeros import cached_zeros

    m = trace.q
    sets = []
    for chi in enumerate_real_characters(m.q):
        if chi.is_principal:
            continue
        d = chi.discriminant
        zs = zeros.get(d) if zeros is not None else cached_zeros(d, 2 * T, use_cache=use_cache)
        if zs is None:
            raise KeyError(f"no zeros for discriminant {d}")
        if zs.height < 2 * T - 1e-9:
            raise ValueError(f"zeros for {d} reach only T={zs.height}, need {2 * T}")
        sets.append(zs)
    sel = trace.checkpoints >= x_min
    x = trace.checkpoints[sel]
    e = trace.e_values[sel]
    mx, mn = {}, {}
    for h in (T, 2 * T):
        dev = np.abs(e - explicit_formula_values(m, x, sets, h))
        mx[h] = float(dev.max()) if len(dev) else 0.0
        mn[h] = float(dev.mean()) if len(dev) else 0.0
    return ExplicitFormulaReport(T, mx, mn, x_min)
