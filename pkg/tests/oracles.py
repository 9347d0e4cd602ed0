"""Independent reference implementations used only by the tests."""
import mpmath

from biasrace.characters import kronecker


def mp_l(d, s):
    k = abs(d)
    return complex(mpmath.dirichlet(s, [kronecker(d, n) for n in range(k)]))


def mp_hardy(d, t):
    """Z(t) for a real primitive character from mpmath's L-values (root number 1)."""
    k = abs(d)
    a = 0 if d > 0 else 1
    theta = t / 2 * mpmath.log(k / mpmath.pi) + mpmath.im(mpmath.loggamma((0.5 + a + 1j * t) / 2))
    val = mpmath.exp(1j * theta) * mpmath.dirichlet(0.5 + 1j * t, [kronecker(d, n) for n in range(k)])
    return float(mpmath.re(val))


def mp_zeros(d, T, step=0.05):
    """Sign changes of mp_hardy on a grid, refined by bisection."""
    out = []
    t0, z0 = step, mp_hardy(d, step)
    t = t0
    while t < T:
        t1 = min(t + step, T)
        z1 = mp_hardy(d, t1)
        if z0 * z1 < 0:
            lo, hi, zlo = t, t1, z0
            for _ in range(40):
                mid = (lo + hi) / 2
                zm = mp_hardy(d, mid)
                if zm * zlo < 0:
                    hi = mid
                else:
                    lo, zlo = mid, zm
            out.append((lo + hi) / 2)
        t, z0 = t1, z1
    return out
