"""Independent reference computations for the test suite.

Everything here is deliberately written with different algorithms than the
package (adaptive quadrature instead of closed forms, recurrences instead of
product formulas, brute-force scans instead of pruned enumeration) so that
agreement is meaningful.
"""

import numpy as np
from scipy.integrate import quad


def combo(frequencies, amplitudes):
    """Callable f(t) = sum_j amp_j exp(i nu_j t)."""
    freqs = np.asarray(frequencies, dtype=complex)
    amps = np.asarray(amplitudes, dtype=complex)

    def f(t):
        return np.sum(amps * np.exp(1j * freqs * t))

    return f


def quad_complex(func, lo, hi):
    re = quad(lambda t: func(t).real, lo, hi, limit=400)[0]
    im = quad(lambda t: func(t).imag, lo, hi, limit=400)[0]
    return re + 1j * im


def inner_product(f, omega, duration):
    """(f, e_omega) = int_0^T f(t) conj(exp(i omega t)) dt by quadrature."""
    return quad_complex(lambda t: f(t) * np.conj(np.exp(1j * omega * t)),
                        0.0, duration)


def duhamel(k, lam, beta, f, duration):
    """Terminal (a, adot) for one mode by adaptive quadrature of the
    sine/cosine convolution kernels.  Handles omega = 0 by the t-limit."""
    w2 = k * k + np.conj(lam)
    w = np.sqrt(complex(w2))
    if w.real < 0 or (w.real == 0 and w.imag < 0):
        w = -w
    if abs(w) < 1e-13:
        s_ker = lambda tau: (duration - tau)
        c_ker = lambda tau: 1.0
    else:
        s_ker = lambda tau: np.sin(w * (duration - tau)) / w
        c_ker = lambda tau: np.cos(w * (duration - tau))
    gain = (2.0 * k / np.pi) * beta
    a = gain * quad_complex(lambda t: f(t) * s_ker(t), 0.0, duration)
    adot = gain * quad_complex(lambda t: f(t) * c_ker(t), 0.0, duration)
    return a, adot


def poly_root_bisection(coeffs, lo, hi, iters=200):
    """Real root of a polynomial (highest degree first) by bisection."""
    p = lambda x: np.polyval(coeffs, x)
    flo = p(lo)
    assert flo * p(hi) < 0, "no sign change in bracket"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * p(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = p(lo)
    return 0.5 * (lo + hi)


def dd_weights(nodes):
    """Divided-difference weights by the recursive definition.

    Returns w with [x_1..x_m]g = sum w_j g(x_j), built from
    [x_1..x_m] = ([x_2..x_m] - [x_1..x_{m-1}]) / (x_m - x_1).
    """
    nodes = list(nodes)
    m = len(nodes)
    if m == 1:
        return np.array([1.0 + 0j])
    upper = dd_weights(nodes[1:])
    lower = dd_weights(nodes[:-1])
    w = np.zeros(m, dtype=complex)
    w[1:] += upper
    w[:-1] -= lower
    return w / (nodes[-1] - nodes[0])


def brute_resonances(lams, res_tol):
    """All (k, l, i, j) with |k^2 - l^2 - (lam_i - lam_j)| <= res_tol,
    by scanning a generous k, l square."""
    lams = np.asarray(lams, dtype=complex)
    n = len(lams)
    bound = max((abs(lams[i] - lams[j]) for i in range(n) for j in range(n)),
                default=0.0) + 1.0
    k_hi = int(np.ceil(bound)) + 2
    out = []
    for k in range(1, k_hi + 1):
        for l in range(1, k_hi + 1):
            if k == l:
                continue
            gap = k * k - l * l
            if abs(gap) > bound:
                continue
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    defect = abs(gap - (lams[i] - lams[j]))
                    if defect <= res_tol:
                        out.append((k, l, i + 1, j + 1, defect))
    return sorted(out, key=lambda t: t[:4])


def sine_series(coeffs):
    """Callable x -> sum_n c_n sin(n x) for a dict {n: c_n}."""

    def u(x):
        return sum(c * np.sin(n * x) for n, c in coeffs.items())

    return u
