"""Dense complex linear algebra primitives shared by all other modules.

Everything operates on plain numpy arrays.  Matrices that are supposed to be
Hermitian are validated rather than trusted: every density matrix in the
pipeline is the end product of a long chain of rotations, embeddings and
quadratures, and silent asymmetry is the most common way those chains go
wrong.

All tolerances are absolute on matrices pre-normalized to unit trace, so the
distances reported downstream carry no hidden scaling.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import ValidationError

# Relative asymmetry (against the largest entry) accepted as rounding noise.
HERMITICITY_RTOL = 1e-12
# Eigenvalues of nominally PSD matrices above this are clamped to zero;
# anything below PSD_REJECT is treated as a genuinely invalid state.
PSD_CLAMP = -1e-10
PSD_REJECT = -1e-8


class EigenSystem(NamedTuple):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    return a


def validate_hermitian(h, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """Return ``h`` as a complex array, or raise naming the worst entry."""
    h = as_square_matrix(h, "hermitian matrix")
    asym = np.abs(h - h.conj().T)
    scale = max(np.abs(h).max(), 1.0)
    worst = np.unravel_index(np.argmax(asym), asym.shape)
    if asym[worst] > rtol * scale:
        row, col = int(worst[0]), int(worst[1])
        raise ValidationError(
            f"matrix is not Hermitian: |H - H^dag| = {asym[worst]:.3e} at entry "
            f"({row}, {col}) exceeds {rtol:.1e} * max|H| = {rtol * scale:.3e}"
        )
    return h


def hermitian_eig(h) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted ascending."""
    h = validate_hermitian(h)
    w, v = np.linalg.eigh(h)
    return EigenSystem(w, v)


def unitary_exp(h) -> np.ndarray:
    """exp(i*h) for Hermitian h, via eigendecomposition.

    The eigendecomposition route keeps the result unitary up to eigensolver
    accuracy, which a truncated series would not.
    """
    w, v = hermitian_eig(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def _is_hermitian(a: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    scale = max(np.abs(a).max(), 1.0)
    return bool(np.abs(a - a.conj().T).max() <= rtol * scale)


def trace_norm(a) -> float:
    """Trace norm: sum of |eigenvalues| for Hermitian input, else singular values."""
    a = as_square_matrix(a)
    if _is_hermitian(a):
        return float(np.abs(np.linalg.eigvalsh(a)).sum())
    return float(scipy.linalg.svdvals(a).sum())


def _psd_root(rho) -> np.ndarray:
    """Matrix square root of a PSD matrix with eigenvalue clamping."""
    w, v = hermitian_eig(rho)
    if w[0] < PSD_REJECT:
        raise ValidationError(
            f"matrix is not positive semidefinite: eigenvalue {w[0]:.3e} below {PSD_REJECT:.1e}"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity of two density matrices, as a value in [0, 1].

    Computed as the trace norm of sqrt(rho) @ sqrt(sigma), which is symmetric
    in the arguments by construction.
    """
    r = _psd_root(rho)
    s = _psd_root(sigma)
    for m, label in ((rho, "rho"), (sigma, "sigma")):
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > 1e-6:
            raise ValidationError(f"{label} must have unit trace, got {tr!r}")
    f = float(scipy.linalg.svdvals(r @ s).sum())
    return min(max(f, 0.0), 1.0)
