"""Terminal-state moment problems and minimal-norm control synthesis.

Driving the system to a prescribed terminal state is equivalent to a family
of moment equations on the control f: its inner products against the grid
exponentials e_{k,l}(t) = exp(i*omega_{k,l}*t) over [0, T] must equal values
gamma_{k,l} computed from the target.  The minimal L2-norm solution inside
the truncated span solves the Hermitian Gram system G alpha = gamma; a
divided-difference basis replaces the raw exponentials when in-block
clustering would poison the conditioning.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ._kernels import phase_integral
from .coupling import SpectralDecomposition
from .exceptions import (BetaZero, ConditioningExceeded, DegenerateEigenvector,
                         ModeOutOfRange)
from .linalg import cond_estimate_1norm, solve_hermitian
from .spectrum import EddFamily, FrequencyGrid
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ModalState", "TargetSpec", "MomentSystem", "ControlSignal",
    "N2Normalization", "gram_entry", "assemble_gram", "target_to_modal",
    "moments_from_target", "synthesize", "realify", "combo_l2_norm",
    "n2_normalize_eigvecs", "n2_sharp_targets", "n2_edd_coefficients",
]


@dataclasses.dataclass
class ModalState:
    """Modal coefficient tables a and adot, rows k = 1..k_max, cols l = 1..n.

    The exponential-form coefficients extend to signed k through
    c_{k,l} = i*omega_{k,l} a_{k,l} + adot_{k,l} with a and adot even in k
    and omega odd in k, so c_{-k,l} = -i*omega_{k,l} a_{k,l} + adot_{k,l}.
    """

    a: np.ndarray
    adot: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=complex)
        self.adot = np.asarray(self.adot, dtype=complex)
        if self.a.shape != self.adot.shape or self.a.ndim != 2:
            raise ValueError("a and adot must be 2-D arrays of equal shape")

    @property
    def k_max(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]

    def c_signed(self, grid: FrequencyGrid) -> np.ndarray:
        """c coefficients aligned with ``grid.signed_indices()``."""
        w = grid.omega[: self.k_max]
        c_pos = 1j * w * self.a + self.adot
        c_neg = -1j * w * self.a + self.adot
        return np.concatenate([c_neg[::-1].ravel(), c_pos.ravel()])


@dataclasses.dataclass
class TargetSpec:
    """Sine-series coefficients of the terminal state and velocity.

    ``z0`` and ``z1`` map mode number n >= 1 to a complex component vector of
    length N (terminal displacement and velocity respectively).
    """

    z0: dict
    z1: dict

    def __post_init__(self):
        self.z0 = {int(n): np.asarray(v, dtype=complex) for n, v in dict(self.z0).items()}
        self.z1 = {int(n): np.asarray(v, dtype=complex) for n, v in dict(self.z1).items()}
        for tab in (self.z0, self.z1):
            for n, v in tab.items():
                if n < 1:
                    raise ValueError(f"mode number {n} must be >= 1")
                if v.ndim != 1 or not np.all(np.isfinite(v.real) & np.isfinite(v.imag)):
                    raise ValueError(f"coefficients for mode {n} must be a finite vector")

    def max_mode(self) -> int:
        modes = list(self.z0) + list(self.z1)
        return max(modes) if modes else 0


@dataclasses.dataclass
class MomentSystem:
    """Assembled Gram system over the signed index order.

    ``gamma`` always stores the raw moments (eigenvalue-ordered); for the
    divided-difference basis the triangular weight map is applied at solve
    time.  ``cond_estimate`` is a 1-norm estimate of the stored Gram.
    """

    index_order: list
    basis_kind: str
    gram: np.ndarray
    cond_estimate: float
    duration: float = 0.0
    gamma: np.ndarray | None = None


@dataclasses.dataclass
class ControlSignal:
    """Finite exponential combination f(t) = sum_j amp_j * exp(i*freq_j*t).

    ``sample_values`` (optional) holds values on the uniform grid
    t_i = i * duration / (samples - 1).  ``realification_residual`` is the
    relative L2 size of the imaginary part of f on [0, duration].
    """

    duration: float
    frequencies: np.ndarray
    amplitudes: np.ndarray
    sample_values: np.ndarray | None = None
    realification_residual: float | None = None
    moment_residual: float | None = None

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=complex)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.frequencies.shape != self.amplitudes.shape:
            raise ValueError("frequencies and amplitudes must align")
        if not self.duration > 0:
            raise ValueError("duration must be positive")

    @property
    def combo(self) -> list:
        return list(zip(self.frequencies.tolist(), self.amplitudes.tolist()))

    @property
    def sample_dt(self) -> float | None:
        if self.sample_values is None:
            return None
        return self.duration / (len(self.sample_values) - 1)

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(1j * np.multiply.outer(t, self.frequencies)) @ self.amplitudes

    def with_samples(self, count: int) -> "ControlSignal":
        if count < 2:
            raise ValueError("need at least two samples")
        t = np.linspace(0.0, self.duration, count)
        return dataclasses.replace(self, sample_values=self.evaluate(t))

    def l2_norm(self) -> float:
        return combo_l2_norm(self.frequencies, self.amplitudes, self.duration)


def gram_entry(omega_a, omega_b, duration: float,
               switch: float | None = None, tol: Tolerances = DEFAULT) -> complex:
    """Inner product (e_a, e_b) of two exponentials over [0, duration].

    Closed form (e^{i*Delta*T} - 1)/(i*Delta) with Delta = omega_a -
    conj(omega_b); a second-order series takes over for |Delta| below the
    switch to avoid cancellation.
    """
    if switch is None:
        switch = tol.series_switch
    delta = complex(omega_a) - complex(omega_b).conjugate()
    return complex(phase_integral(delta, duration, switch=switch))


def combo_l2_norm(frequencies, amplitudes, duration: float,
                  tol: Tolerances = DEFAULT) -> float:
    """L2(0, duration) norm of an exponential combination (Gram quadratic form)."""
    f = np.asarray(frequencies, dtype=complex)
    a = np.asarray(amplitudes, dtype=complex)
    if f.size == 0:
        return 0.0
    delta = f[None, :] - np.conj(f)[:, None]
    m = phase_integral(delta, duration, switch=tol.series_switch)
    val = np.conj(a) @ (m @ a)
    return float(math.sqrt(max(val.real, 0.0)))


def _imag_residual(frequencies, amplitudes, duration, tol: Tolerances) -> float:
    # Im f = (f - conj f)/(2i) as an exponential combination
    f = np.asarray(frequencies, dtype=complex)
    a = np.asarray(amplitudes, dtype=complex)
    fr = np.concatenate([f, -np.conj(f)])
    ar = np.concatenate([a / 2j, -np.conj(a) / 2j])
    num = combo_l2_norm(fr, ar, duration, tol=tol)
    den = combo_l2_norm(f, a, duration, tol=tol)
    return num / max(den, 1e-300)


def assemble_gram(grid: FrequencyGrid, duration: float, basis_kind: str = "raw",
                  edd: EddFamily | None = None,
                  tol: Tolerances = DEFAULT) -> MomentSystem:
    """Build the Hermitian Gram of the chosen family over [0, duration].

    ``basis_kind`` is "raw" (grid exponentials, eigenvalue order inside each
    block) or "edd" (divided differences over block-sorted frequencies).
    """
    if not duration > 0:
        raise ValueError("duration must be positive")
    index_order = grid.signed_indices()
    if basis_kind == "raw":
        freqs = grid.frequencies()
        delta = freqs[None, :] - np.conj(freqs)[:, None]
        gram = phase_integral(delta, duration, switch=tol.series_switch)
    elif basis_kind == "edd":
        if edd is None:
            raise ValueError("edd family required for basis_kind='edd'")
        freqs = edd.frequencies()
        delta = freqs[None, :] - np.conj(freqs)[:, None]
        base = phase_integral(delta, duration, switch=tol.series_switch)
        w = edd.weight_blockdiag()
        gram = np.conj(w) @ base @ w.T
    else:
        raise ValueError(f"unknown basis_kind {basis_kind!r}")
    gram = (gram + gram.conj().T) / 2.0
    cond = cond_estimate_1norm(gram)
    return MomentSystem(index_order=index_order, basis_kind=basis_kind,
                        gram=gram, cond_estimate=cond, duration=duration)


def target_to_modal(target: TargetSpec, spec: SpectralDecomposition,
                    grid: FrequencyGrid) -> ModalState:
    """Project target sine coefficients onto the eigenbasis.

    a_{n,l} = <z0_n, psi_l> and adot_{n,l} = <z1_n, psi_l>; modes absent from
    the target are zero.  Raises ModeOutOfRange if a target mode exceeds the
    grid truncation.
    """
    n_comp = spec.n
    k_max = grid.k_max
    top = target.max_mode()
    if top > k_max:
        raise ModeOutOfRange(f"target mode {top} exceeds truncation {k_max}")
    a = np.zeros((k_max, n_comp), dtype=complex)
    adot = np.zeros((k_max, n_comp), dtype=complex)
    proj = np.conj(spec.biorthogonal)  # column l: projection weights for level l
    for table, out in ((target.z0, a), (target.z1, adot)):
        for mode, vec in table.items():
            if vec.shape != (n_comp,):
                raise ValueError(f"mode {mode}: expected {n_comp} components")
            out[mode - 1] = vec @ proj
    return ModalState(a, adot)


def moments_from_target(modal: ModalState, spec: SpectralDecomposition,
                        grid: FrequencyGrid, duration: float,
                        tol: Tolerances = DEFAULT) -> np.ndarray:
    """Moment values gamma over the signed index order.

    gamma_{k,l} = c_{k,l}(T) * (2|k|/pi * beta_l * e^{i*omega_{k,l}*T})^{-1}
    with omega odd in k.  Raises BetaZero when any |beta_l| is at or below
    tol.beta_tol.
    """
    beta = spec.beta
    if np.any(np.abs(beta) <= tol.beta_tol):
        worst = int(np.argmin(np.abs(beta)))
        raise BetaZero(f"|beta_{worst + 1}| = {np.abs(beta[worst]):.3e} "
                       "is numerically zero")
    c = modal.c_signed(grid)
    idx = grid.signed_indices()
    freqs = grid.frequencies()
    k_abs = np.array([abs(k) for k, _ in idx], dtype=float)
    beta_at = np.array([beta[l - 1] for _, l in idx])
    phase = np.exp(-1j * freqs * duration)
    return c * (np.pi / (2.0 * k_abs)) / beta_at * phase


def _edd_transform_gamma(gamma: np.ndarray, edd: EddFamily) -> np.ndarray:
    """Map raw moments to divided-difference moments, blockwise."""
    n = edd.n
    ks = list(range(-edd.k_max, 0)) + list(range(1, edd.k_max + 1))
    out = np.empty_like(gamma)
    for pos, k in enumerate(ks):
        s = pos * n
        block = edd.blocks[k]
        g_sorted = gamma[s:s + n][block.perm]
        out[s:s + n] = np.conj(block.weight_matrix()) @ g_sorted
    return out


def synthesize(ms: MomentSystem, grid: FrequencyGrid,
               edd: EddFamily | None = None,
               tol: Tolerances = DEFAULT) -> ControlSignal:
    """Minimal-norm control in the span of the assembled family.

    Solves the Gram system for the basis coefficients and expands the result
    into a plain exponential combination.  Raises SingularSystem on pivot
    failure (resonance or insufficient control time) and
    ConditioningExceeded when the Gram condition estimate is above
    ``tol.cond_cap``.
    """
    if ms.gamma is None:
        raise ValueError("moment system has no gamma attached")
    if ms.basis_kind == "edd":
        if edd is None:
            raise ValueError("edd family required to synthesize in edd basis")
        rhs = _edd_transform_gamma(ms.gamma, edd)
    else:
        rhs = ms.gamma
    coef, cond = solve_hermitian(ms.gram, rhs, tol=tol)
    if ms.cond_estimate > tol.cond_cap:
        raise ConditioningExceeded(
            f"gram condition estimate {ms.cond_estimate:.3e} exceeds "
            f"{tol.cond_cap:.1e}")
    rhs_norm = float(np.linalg.norm(rhs))
    residual = 0.0
    if rhs_norm > 0:
        residual = float(np.linalg.norm(ms.gram @ coef - rhs)) / rhs_norm

    if ms.basis_kind == "edd":
        freqs = edd.frequencies()
        n = edd.n
        amps = np.empty_like(coef)
        ks = list(range(-edd.k_max, 0)) + list(range(1, edd.k_max + 1))
        for pos, k in enumerate(ks):
            s = pos * n
            w = edd.blocks[k].weight_matrix()
            amps[s:s + n] = w.T @ coef[s:s + n]
    else:
        freqs = grid.frequencies()
        amps = coef
    return ControlSignal(
        duration=ms.duration, frequencies=freqs, amplitudes=amps,
        realification_residual=_imag_residual(freqs, amps, ms.duration, tol),
        moment_residual=residual)


def realify(signal: ControlSignal, tol: Tolerances = DEFAULT) -> ControlSignal:
    """Project a control onto its real part, as an exponential combination.

    Re f = (f + conj f)/2 contributes (nu, a/2) and (-conj(nu), conj(a)/2);
    coinciding frequencies are merged.  The residual recorded on the output
    is the relative imaginary content of the input before projection.
    """
    resid = _imag_residual(signal.frequencies, signal.amplitudes,
                           signal.duration, tol)
    f = np.concatenate([signal.frequencies, -np.conj(signal.frequencies)])
    a = np.concatenate([signal.amplitudes / 2.0, np.conj(signal.amplitudes) / 2.0])
    order = np.lexsort((f.imag, f.real))
    f, a = f[order], a[order]
    merged_f, merged_a = [f[0]], [a[0]]
    for nu, amp in zip(f[1:], a[1:]):
        if abs(nu - merged_f[-1]) <= 1e-12 * (1.0 + abs(nu)):
            merged_a[-1] += amp
        else:
            merged_f.append(nu)
            merged_a.append(amp)
    return ControlSignal(
        duration=signal.duration,
        frequencies=np.array(merged_f), amplitudes=np.array(merged_a),
        realification_residual=resid,
        moment_residual=signal.moment_residual)


@dataclasses.dataclass
class N2Normalization:
    """Rescaled eigenvector pair for the two-component sharp construction.

    ``phi1 + phi2 = (alpha, 0)``; the second components are +1 and -1.  The
    attached decomposition carries the rescaled biorthogonal family and beta.
    """

    phi1: np.ndarray
    phi2: np.ndarray
    alpha: complex
    decomposition: SpectralDecomposition


def n2_normalize_eigvecs(spec: SpectralDecomposition,
                         tol: Tolerances = DEFAULT,
                         b: np.ndarray | None = None) -> N2Normalization:
    """Rescale a two-component eigenvector pair so the second components cancel.

    The rescaled pair has second components +1 and -1 (in some order, fixed
    so that Re(alpha) > 0, with ties broken toward Im(alpha) >= 0).  Requires
    both eigenvectors to have nonzero second components (this is forced by
    the rank condition when the control direction is the first coordinate
    axis); raises DegenerateEigenvector otherwise.
    """
    if spec.n != 2:
        raise ValueError("normalization applies to two-component systems only")
    v = spec.eigenvectors
    for j in range(2):
        if abs(v[1, j]) <= 1e-12 * np.linalg.norm(v[:, j]):
            raise DegenerateEigenvector(
                f"eigenvector {j + 1} has numerically zero second component; "
                "inconsistent with the rank condition")
    phi1 = v[:, 0] / v[1, 0]
    phi2 = -v[:, 1] / v[1, 1]
    alpha = phi1[0] + phi2[0]
    if abs(alpha) <= 1e-12:
        raise DegenerateEigenvector("rescaled eigenvectors are parallel")
    if alpha.real < 0 or (alpha.real == 0 and alpha.imag < 0):
        phi1, phi2, alpha = -phi1, -phi2, -alpha
    vp = np.column_stack([phi1, phi2])
    wp = np.linalg.inv(vp)
    if b is None:
        # recover b from the original decomposition: b = V beta
        b = spec.eigenvectors @ spec.beta
    beta = wp @ np.asarray(b, dtype=complex)
    rescaled = SpectralDecomposition(
        eigenvalues=spec.eigenvalues.copy(),
        eigenvectors=vp,
        biorthogonal=wp.conj().T,
        beta=beta,
        min_separation=spec.min_separation)
    return N2Normalization(phi1=phi1, phi2=phi2, alpha=complex(alpha),
                           decomposition=rescaled)


def n2_sharp_targets(target: TargetSpec, norm: N2Normalization,
                     grid: FrequencyGrid) -> ModalState:
    """Modal tables for a two-component target via the order-one
    divided-difference back-substitution.

    With the rescaled pair, the combined mode shape for the order-one
    function is (alpha, 0) and the order-two shape is phi2 * (w_{n,2} -
    w_{n,1}), so the second target component determines the order-two
    coefficient alone and the first component then fixes the order-one
    coefficient.  The result is returned in plain (a, adot) form.
    """
    if grid.n != 2:
        raise ValueError("sharp targets require a two-component grid")
    top = target.max_mode()
    if top > grid.k_max:
        raise ModeOutOfRange(f"target mode {top} exceeds truncation {grid.k_max}")
    alpha = norm.alpha
    beta_c = norm.phi2[0]
    gamma_c = norm.phi2[1]
    a = np.zeros((grid.k_max, 2), dtype=complex)
    adot = np.zeros((grid.k_max, 2), dtype=complex)
    for table, out in ((target.z0, a), (target.z1, adot)):
        for mode, vec in table.items():
            if vec.shape != (2,):
                raise ValueError(f"mode {mode}: expected 2 components")
            gap = grid.omega_at(mode, 2) - grid.omega_at(mode, 1)
            t2 = vec[1] / (gamma_c * gap)
            t1 = (vec[0] - t2 * beta_c * gap) / alpha
            out[mode - 1, 0] = t1
            out[mode - 1, 1] = t1 + t2 * gap
    return ModalState(a, adot)


def n2_edd_coefficients(modal: ModalState, grid: FrequencyGrid) -> np.ndarray:
    """Order-one divided-difference coefficients (tilde table) of a modal state.

    Column 0 is a_{n,1}; column 1 is (a_{n,2} - a_{n,1}) / (w_{n,2} - w_{n,1}).
    """
    if grid.n != 2:
        raise ValueError("divided-difference coefficients require n = 2")
    out = np.empty_like(modal.a)
    for mode in range(1, modal.k_max + 1):
        gap = grid.omega_at(mode, 2) - grid.omega_at(mode, 1)
        out[mode - 1, 0] = modal.a[mode - 1, 0]
        out[mode - 1, 1] = (modal.a[mode - 1, 1] - modal.a[mode - 1, 0]) / gap
    return out
