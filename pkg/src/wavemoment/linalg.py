"""Dense complex linear algebra with deterministic ordering.

Thin, contract-enforcing wrappers over LAPACK (through numpy/scipy): a dense
eigensolver for small matrices with a fixed eigenvalue ordering and residual
guarantee, a Hermitian solve with pivot diagnostics plus a 1-norm condition
estimate, and a numeric rank from column-pivoted QR.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgWarning, get_lapack_funcs, lu_factor, lu_solve

from .exceptions import DimensionTooLarge, NonConvergence, SingularSystem
from .tolerances import DEFAULT, Tolerances

MAX_DENSE_DIM = 32

__all__ = [
    "EigenResult", "eig_dense", "solve_hermitian", "rank_qr",
    "cond_estimate_1norm", "MAX_DENSE_DIM",
]


@dataclasses.dataclass
class EigenResult:
    """Eigendecomposition with eigenvalues sorted ascending by (Re, Im).

    Attributes
    ----------
    eigenvalues : (n,) complex ndarray
    eigenvectors : (n, n) complex ndarray
        Columns are unit-norm eigenvectors; the largest-magnitude component
        of each is rotated to be real positive so output is reproducible.
    residuals : (n,) float ndarray
        ||A v - lam v||_2 per unit eigenvector.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray


def _as_square(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise ValueError("matrix entries must be finite")
    return a


def eig_dense(a, eig_tol: float | None = None, tol: Tolerances = DEFAULT) -> EigenResult:
    """Full eigendecomposition of a small dense complex matrix.

    Parameters
    ----------
    a : (n, n) array_like, n <= 32
    eig_tol : float, optional
        Residual bound, absolute on unit-norm eigenvectors.  Defaults to
        ``tol.eig_tol``.

    Raises
    ------
    DimensionTooLarge
        If n exceeds the supported dense size.
    NonConvergence
        If LAPACK fails or any residual exceeds the bound.
    """
    # keep real input real: the real-matrix LAPACK path returns exactly
    # conjugate eigenvalue pairs, which keeps the (Re, Im) sort well defined
    a = np.asarray(a)
    if not np.iscomplexobj(a):
        a = a.astype(float, copy=False)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise ValueError("matrix entries must be finite")
    n = a.shape[0]
    if n > MAX_DENSE_DIM:
        raise DimensionTooLarge(f"matrix size {n} exceeds {MAX_DENSE_DIM}")
    if eig_tol is None:
        eig_tol = tol.eig_tol
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    values = values.astype(complex, copy=False)
    vectors = vectors.astype(complex)

    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]

    # unit norm, then rotate the largest component to the positive real axis
    for j in range(n):
        v = vectors[:, j]
        v = v / np.linalg.norm(v)
        i = int(np.argmax(np.abs(v)))
        phase = v[i] / abs(v[i])
        vectors[:, j] = v / phase

    residuals = np.linalg.norm(a @ vectors - vectors * values[None, :], axis=0)
    if np.any(residuals > eig_tol):
        raise NonConvergence(
            f"eigenpair residual {residuals.max():.3e} exceeds {eig_tol:.3e}")
    return EigenResult(values, vectors, residuals)


def cond_estimate_1norm(g, lu=None) -> float:
    """1-norm condition estimate of a square matrix via LAPACK gecon.

    Returns inf when the matrix is numerically singular.
    """
    g = np.asarray(g, dtype=complex)
    anorm = float(np.linalg.norm(g, 1)) if g.size else 0.0
    if anorm == 0.0:
        return np.inf
    if lu is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            try:
                lu, _ = lu_factor(g)
            except (ValueError, scipy.linalg.LinAlgError):
                return np.inf
    gecon = get_lapack_funcs("gecon", (g,))
    rcond, info = gecon(lu, anorm)
    if info != 0 or rcond <= 0.0:
        return np.inf
    return 1.0 / float(rcond)


def solve_hermitian(g, rhs, pivot_tol: float | None = None,
                    tol: Tolerances = DEFAULT):
    """Solve G x = rhs for Hermitian G with a condition estimate.

    Uses partially pivoted LU plus one step of iterative refinement, which
    keeps the residual well under ``1e-10 * cond * ||rhs||``.

    Returns
    -------
    x : (n,) complex ndarray
    cond_estimate : float
        1-norm condition estimate of G.

    Raises
    ------
    SingularSystem
        If any pivot falls below ``pivot_tol * ||G||_1``; for Gram matrices
        this signals a resonant family or a control time below threshold.
    ValueError
        If G is not Hermitian within ``tol.hermit_rtol``.
    """
    g = _as_square(g)
    rhs = np.asarray(rhs, dtype=complex)
    n = g.shape[0]
    if rhs.shape != (n,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({n},)")
    if pivot_tol is None:
        pivot_tol = tol.pivot_tol

    scale = float(np.abs(g).max()) if g.size else 0.0
    if scale and np.abs(g - g.conj().T).max() > tol.hermit_rtol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")

    anorm = float(np.linalg.norm(g, 1)) if g.size else 0.0
    if anorm == 0.0:
        raise SingularSystem("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(g)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= pivot_tol * anorm:
        raise SingularSystem(
            f"pivot {pivots.min():.3e} below {pivot_tol:.1e} * ||G||_1")

    cond = cond_estimate_1norm(g, lu=lu)
    x = lu_solve((lu, piv), rhs)
    x = x + lu_solve((lu, piv), rhs - g @ x)
    return x, cond


def rank_qr(m, rank_tol: float | None = None, tol: Tolerances = DEFAULT) -> int:
    """Numeric rank from column-pivoted QR.

    Counts diagonal entries of R with magnitude above
    ``rank_tol * max |R_jj|``.  An empty or zero matrix has rank 0.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("expected a 2-D array")
    if m.size == 0:
        return 0
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValueError("matrix entries must be finite")
    if rank_tol is None:
        rank_tol = tol.rank_tol
    r = scipy.linalg.qr(m, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    top = diag.max() if diag.size else 0.0
    if top == 0.0:
        return 0
    return int(np.count_nonzero(diag > rank_tol * top))
