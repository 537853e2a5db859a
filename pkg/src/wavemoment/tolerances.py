"""Numerical tolerances used across the package.

All thresholds live in one frozen dataclass so a run can be reproduced from
its report.  Profiles give coarse presets; individual fields can be overridden
through the CLI config.
"""

from __future__ import annotations

import dataclasses
import os

_PROFILE_ENV = "WAVEMOMENT_PROFILE"


@dataclasses.dataclass(frozen=True)
class Tolerances:
    # eigensolver residual bound, absolute on unit-norm eigenvectors
    eig_tol: float = 1e-10
    # Hermitian solve: pivot below pivot_tol * ||G||_1 means singular
    pivot_tol: float = 1e-12
    # numeric rank: QR diagonal relative cutoff
    rank_tol: float = 1e-9
    # eigenvalue separation: repeated if min gap <= sep_scale * (1 + ||A||)
    sep_scale: float = 1e-8
    # resonance defect |(k^2 - l^2) - (lam_i - lam_j)| threshold
    res_tol: float = 1e-9
    # control-time comparison slack for T >= 2*pi*N
    time_tol: float = 1e-12
    # |beta_l| at or below this is treated as a rank failure
    beta_tol: float = 1e-12
    # |omega| at or below this is a zero-frequency mode
    zero_tol: float = 1e-10
    # frequency collision threshold is coll_scale * (1 + K)
    coll_scale: float = 1e-8
    # small-argument series switch for oscillatory kernel integrals;
    # covers the resonant-limit band (<= 1e-8) with a guard margin
    series_switch: float = 1e-6
    # Gram condition estimate cap for synthesis
    cond_cap: float = 1e12
    # relative Hermiticity check on Gram/solve inputs
    hermit_rtol: float = 1e-10
    # biorthogonality residual allowed in spectral decomposition
    biorth_tol: float = 1e-9
    # default verification threshold on terminal modal error
    verify_rtol: float = 1e-6

    def replace(self, **kwargs) -> "Tolerances":
        return dataclasses.replace(self, **kwargs)


DEFAULT = Tolerances()

PROFILES = {
    "default": DEFAULT,
    "strict": DEFAULT.replace(res_tol=1e-10, cond_cap=1e10, verify_rtol=1e-8),
    "loose": DEFAULT.replace(res_tol=1e-8, cond_cap=1e14, verify_rtol=1e-4),
}


def from_profile(name: str | None = None) -> Tolerances:
    """Resolve a tolerance profile by name, or from the environment.

    The only environment influence on the package: ``WAVEMOMENT_PROFILE``
    selects the default profile name when ``name`` is None.
    """
    if name is None:
        name = os.environ.get(_PROFILE_ENV, "default")
    try:
        return PROFILES[name]
    except KeyError:
        from .exceptions import BadInput

        raise BadInput(f"unknown tolerance profile {name!r}; "
                       f"expected one of {sorted(PROFILES)}") from None
