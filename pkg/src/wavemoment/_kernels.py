"""Closed-form primitives for oscillatory integrals on [0, duration].

Everything here reduces to exact antiderivatives of exponentials; the only
numerical care is the small-argument series that avoids cancellation in
(e^{ix} - 1)/x type expressions.  The series switch doubles as the resonant
limit: at delta == 0 the formulas below return the exact limits.
"""

from __future__ import annotations

import numpy as np

SERIES_SWITCH = 1e-6


def phase_integral(delta, duration, switch=SERIES_SWITCH):
    """Integral of e^{i*delta*t} dt over [0, duration].

    Closed form (e^{i*delta*T} - 1)/(i*delta); for |delta| <= switch a
    second-order series T*(1 + x/2 + x^2/6), x = i*delta*T, which is exact
    in the resonant limit delta -> 0.
    Accepts scalars or arrays, complex delta allowed.
    """
    d = np.asarray(delta, dtype=complex)
    scalar = d.ndim == 0
    d = np.atleast_1d(d)
    out = np.empty(d.shape, dtype=complex)
    small = np.abs(d) <= switch
    x = 1j * d[small] * duration
    out[small] = duration * (1.0 + x / 2.0 + x * x / 6.0)
    big = ~small
    db = d[big]
    out[big] = (np.exp(1j * db * duration) - 1.0) / (1j * db)
    return out[0] if scalar else out


def ramp_integral(nu, duration, switch=SERIES_SWITCH):
    """Integral of (duration - t) * e^{i*nu*t} dt over [0, duration].

    This is the zero-frequency Duhamel kernel: sin(w s)/w -> s as w -> 0.
    """
    n = np.asarray(nu, dtype=complex)
    scalar = n.ndim == 0
    n = np.atleast_1d(n)
    out = np.empty(n.shape, dtype=complex)
    small = np.abs(n) <= switch
    x = 1j * n[small] * duration
    out[small] = duration * duration * (0.5 + x / 6.0 + x * x / 24.0)
    big = ~small
    nb = 1j * n[big]
    out[big] = (np.exp(nb * duration) - 1.0) / (nb * nb) - duration / nb
    return out[0] if scalar else out


def segment_moment(mu, h, switch=SERIES_SWITCH):
    """Integral of t * e^{i*mu*t} dt over [0, h] (first moment on a segment)."""
    m = np.asarray(mu, dtype=complex)
    scalar = m.ndim == 0
    m = np.atleast_1d(m)
    out = np.empty(m.shape, dtype=complex)
    small = np.abs(m) <= switch
    y = 1j * m[small] * h
    out[small] = h * h * (0.5 + y / 3.0 + y * y / 8.0)
    big = ~small
    mb = 1j * m[big]
    e = np.exp(mb * h)
    out[big] = (h * e) / mb - (e - 1.0) / (mb * mb)
    return out[0] if scalar else out
