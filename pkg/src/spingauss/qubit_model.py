"""The n-qubit statistical family in its Schur-Weyl block form.

An ensemble of n qubits, each in the rotated state U(u/sqrt(n)) diag(mu, 1-mu)
U(u/sqrt(n))^dag, is permutation invariant and block-diagonalizes over total
spin j.  This module provides the block weights, multiplicities, block density
matrices and the concentration set of spins that carries asymptotically all of
the weight.

All weights are computed in log space and exponentiated only at the end;
multiplicities and mu-powers overflow or underflow for n beyond a few hundred
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln

import numpy as np

from .errors import DomainError
from .irreps import HalfInteger, LocalParam, rotation_unitary


@dataclass(frozen=True)
class ModelParams:
    """Ensemble size n, larger eigenvalue mu, concentration exponent epsilon."""

    n: int
    mu: float
    epsilon: float = 0.1

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not 0.5 < self.mu <= 1.0:
            raise DomainError(f"mu must lie in (1/2, 1], got {self.mu!r}")
        if not 0.0 < self.epsilon < 0.5:
            raise DomainError(f"epsilon must lie in (0, 1/2), got {self.epsilon!r}")

    @property
    def p(self) -> float:
        """Eigenvalue ratio (1 - mu)/mu in [0, 1)."""
        return (1.0 - self.mu) / self.mu


@dataclass(frozen=True)
class BlockState:
    """One spin-j summand: its weight and its (2j+1)-dimensional density matrix."""

    j: HalfInteger
    weight: float
    matrix: np.ndarray


@dataclass(frozen=True)
class EnsembleState:
    """Full block-diagonal ensemble state: parameters plus all spin blocks."""

    params: ModelParams
    u: LocalParam
    blocks: tuple[BlockState, ...]

    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.blocks])

    def spins(self) -> tuple[HalfInteger, ...]:
        return tuple(b.j for b in self.blocks)


def valid_spins(n: int) -> tuple[HalfInteger, ...]:
    """All total spins compatible with n qubits, ascending (2j runs n mod 2 .. n)."""
    return tuple(HalfInteger(tj) for tj in range(n % 2, n + 1, 2))


def _check_spin(n: int, j: HalfInteger) -> None:
    if j.twoj > n:
        raise DomainError(f"spin {j} exceeds n/2 = {n / 2}")
    if (n - j.twoj) % 2 != 0:
        raise DomainError(f"spin {j} has wrong parity for n = {n}")


def spin_center(params: ModelParams) -> float:
    """Center n(mu - 1/2) of the block-weight distribution."""
    return params.n * (params.mu - 0.5)


def multiplicity(n: int, j: HalfInteger) -> int:
    """Multiplicity of the spin-j block, C(n, n/2-j) - C(n, n/2-j-1), exactly.

    Python integers make the binomial difference exact for any n; the log-space
    companion below is what the weight computation actually uses.
    """
    _check_spin(n, j)
    k = (n - j.twoj) // 2
    second = math.comb(n, k - 1) if k >= 1 else 0
    return math.comb(n, k) - second


def log_multiplicity(n: int, j: HalfInteger) -> float:
    """log of the multiplicity, via the cancellation-free product form.

    The binomial difference equals C(n, n/2-j) * (2j+1)/(n/2+j+1), so no
    log-space subtraction is needed.
    """
    _check_spin(n, j)
    k = (n - j.twoj) // 2
    logbin = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return logbin + math.log(j.twoj + 1) - math.log(n / 2.0 + j.value + 1)


def log_block_weight(params: ModelParams, j: HalfInteger) -> float:
    """log of the block weight; -inf where the weight vanishes (mu = 1, j < n/2)."""
    _check_spin(params.n, j)
    n, mu = params.n, params.mu
    if mu == 1.0:
        # pure product state lives entirely in the symmetric block
        return 0.0 if j.twoj == n else -math.inf
    p = params.p
    half_minus = (n - j.twoj) / 2.0
    half_plus = (n + j.twoj) / 2.0
    logw = (
        log_multiplicity(n, j)
        - math.log(2.0 * mu - 1.0)
        + half_minus * math.log(1.0 - mu)
        + (half_plus + 1.0) * math.log(mu)
    )
    t = (j.twoj + 1) * math.log(p)
    if t > -700.0:
        logw += math.log1p(-math.exp(t))
    return logw


def block_weight(params: ModelParams, j: HalfInteger) -> float:
    """Probability weight of the spin-j block, in [0, 1]."""
    logw = log_block_weight(params, j)
    if logw == -math.inf:
        return 0.0
    return min(math.exp(logw), 1.0)


def binomial_factor(params: ModelParams, j: HalfInteger) -> float:
    """Ratio of the block weight to the binomial mass B_{n,mu}(n/2+j).

    Recomputed from the two log-space quantities; the closed form below is the
    independent route the tests compare against.
    """
    if params.mu == 1.0:
        raise DomainError("binomial factor needs mu < 1")
    n, mu = params.n, params.mu
    half_plus = (n + j.twoj) / 2.0
    logbin = gammaln(n + 1) - gammaln(half_plus + 1) - gammaln(n - half_plus + 1)
    log_b = logbin + half_plus * math.log(mu) + (n - half_plus) * math.log(1.0 - mu)
    return math.exp(log_block_weight(params, j) - log_b)


def binomial_factor_closed_form(params: ModelParams, j: HalfInteger) -> float:
    """The correction factor in closed form, finite and positive for valid (n, j)."""
    if params.mu == 1.0:
        raise DomainError("binomial factor needs mu < 1")
    n, mu, p = params.n, params.mu, params.p
    jn = spin_center(params)
    t = (j.twoj + 1) * math.log(p) if p > 0 else -math.inf
    tail = -math.expm1(t) if t > -700.0 else 1.0
    num = n + (2.0 * (j.value - jn) + 1.0) / (2.0 * mu - 1.0)
    den = n + (j.value - jn + 1.0) / mu
    return tail * num / den


def concentration_set(params: ModelParams) -> tuple[HalfInteger, ...]:
    """Parity-valid spins within n^(1/2+epsilon) of the center n(mu - 1/2)."""
    jn = spin_center(params)
    width = params.n ** (0.5 + params.epsilon)
    lo, hi = 2.0 * (jn - width), 2.0 * (jn + width)
    spins = tuple(j for j in valid_spins(params.n) if lo <= j.twoj <= hi)
    if not spins:
        raise DomainError("empty concentration set; epsilon too small for this n")
    return spins


def concentration_weight(params: ModelParams) -> float:
    """Total block weight carried by the concentration set."""
    return float(sum(block_weight(params, j) for j in concentration_set(params)))


def block_state_zero(params: ModelParams, j: HalfInteger) -> np.ndarray:
    """Unrotated spin-j block: diagonal entries proportional to p^k, descending m."""
    _check_spin(params.n, j)
    p = params.p
    d = j.dim
    out = np.zeros((d, d), dtype=complex)
    if p == 0.0:
        out[0, 0] = 1.0
        return out
    k = np.arange(d)
    c = (1.0 - p) / (1.0 - p ** d)
    out[k, k] = c * p ** k
    return out


def block_state(params: ModelParams, j: HalfInteger, u: LocalParam) -> np.ndarray:
    """Rotated spin-j block U_j(u/sqrt(n)) rho0_j U_j(u/sqrt(n))^dag."""
    rho0 = block_state_zero(params, j)
    if u.norm == 0.0:
        return rho0
    um = rotation_unitary(j, u.scaled(1.0 / math.sqrt(params.n)))
    return um @ rho0 @ um.conj().T


def ensemble(params: ModelParams, u: LocalParam) -> EnsembleState:
    """The full block-diagonal ensemble state for local parameter u."""
    blocks = tuple(
        BlockState(j, block_weight(params, j), block_state(params, j, u))
        for j in valid_spins(params.n)
    )
    return EnsembleState(params, u, blocks)
