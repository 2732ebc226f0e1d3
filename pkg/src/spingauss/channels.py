"""Transfer channels between the qubit ensemble and the oscillator.

The forward channel embeds every spin block into the oscillator's number
basis (|j, m> -> |j - m>, the identity on array indices in this package's
conventions) and mixes the embedded blocks with their weights.  The inverse
channel block-projects an oscillator state back onto each spin block and
routes whatever mass lies outside the block's image to the highest weight
vector |j, j>, which keeps it trace preserving and deterministic.

The convergence experiments evaluate trace-norm distances on a finite grid of
local parameters; a true supremum is never computed and the grid is recorded
in every sweep record.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import TruncationError, ValidationError
from .irreps import HalfInteger, LocalParam, spin_coherent_coords
from .numerics import trace_norm
from .oscillator import (
    FockOperator,
    FockTruncation,
    coherent_coefficients,
    default_truncation,
    displaced_thermal,
)
from .qubit_model import (
    BlockState,
    EnsembleState,
    ModelParams,
    block_weight,
    concentration_set,
    ensemble,
    valid_spins,
)

# Blocks whose weight is below this cannot move any reported distance above
# the 1e-10 test tolerances; the skipped weight is still accounted for.
NEGLIGIBLE_WEIGHT = 1e-14


@dataclass(frozen=True)
class EmbeddingMap:
    """Isometric embedding of the spin-j block into a truncated Fock space."""

    j: HalfInteger
    trunc: FockTruncation

    def __post_init__(self):
        if self.trunc.dim < self.j.dim:
            raise TruncationError(
                f"truncation dim {self.trunc.dim} below block dim {self.j.dim}"
            )


def embed_block(rho_j: np.ndarray, emb: EmbeddingMap) -> FockOperator:
    """V_j rho V_j^dag: the block becomes the top-left corner, zeros elsewhere."""
    d = emb.j.dim
    rho_j = np.asarray(rho_j, dtype=complex)
    if rho_j.shape != (d, d):
        raise ValidationError(f"block shape {rho_j.shape} does not match spin {emb.j}")
    out = np.zeros((emb.trunc.dim, emb.trunc.dim), dtype=complex)
    out[:d, :d] = rho_j
    return FockOperator(FockTruncation(emb.trunc.dim), out)


def project_block(phi: np.ndarray, emb: EmbeddingMap) -> np.ndarray:
    """V_j^dag phi V_j, without the leftover-mass completion."""
    d = emb.j.dim
    return np.asarray(phi, dtype=complex)[:d, :d].copy()


def inverse_channel_block(phi: np.ndarray | FockOperator, emb: EmbeddingMap) -> np.ndarray:
    """Left inverse of embed_block, extended to all oscillator states.

    The block-diagonal part inside the image comes back unchanged; the trace
    sitting outside the image is routed to |j, j> (index 0), which keeps the
    map trace preserving.
    """
    m = phi.matrix if isinstance(phi, FockOperator) else np.asarray(phi, dtype=complex)
    d = min(emb.j.dim, m.shape[0])
    out = np.zeros((emb.j.dim, emb.j.dim), dtype=complex)
    out[:d, :d] = m[:d, :d]
    leftover = float(np.trace(m[d:, d:]).real)
    out[0, 0] += leftover
    return out


def forward_channel(
    ens: EnsembleState,
    trunc: FockTruncation,
    js: tuple[HalfInteger, ...] | None = None,
) -> FockOperator:
    """Weighted sum of embedded blocks; restricting ``js`` drops the rest.

    The trace of the result equals the total weight of the included blocks,
    so an excluded-weight report is one subtraction away.
    """
    include = None if js is None else set(js)
    out = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    for b in ens.blocks:
        if include is not None and b.j not in include:
            continue
        if b.weight == 0.0:
            continue
        if b.j.dim > trunc.dim:
            raise TruncationError(
                f"truncation dim {trunc.dim} below block dim {b.j.dim} (spin {b.j})"
            )
        out[: b.j.dim, : b.j.dim] += b.weight * b.matrix
    return FockOperator(FockTruncation(trunc.dim), out)


def inverse_channel(phi: np.ndarray | FockOperator, params: ModelParams) -> EnsembleState:
    """Map an oscillator state to a block-diagonal ensemble with the model weights."""
    m = phi.matrix if isinstance(phi, FockOperator) else np.asarray(phi, dtype=complex)
    blocks = []
    for j in valid_spins(params.n):
        emb = EmbeddingMap(j, FockTruncation(max(m.shape[0], j.dim)))
        blocks.append(BlockState(j, block_weight(params, j), inverse_channel_block(m, emb)))
    return EnsembleState(params, LocalParam(0.0, 0.0), tuple(blocks))


def ensemble_distance(a: EnsembleState, b: EnsembleState) -> float:
    """Trace-norm distance between two ensembles sharing block structure.

    Both states must carry the same (n, mu), hence the same weights, and the
    multiplicity factors cancel: the distance is the weighted sum of block
    trace norms.  Blocks of negligible weight are skipped and bounded by the
    worst case 2 * weight instead of being diagonalized.
    """
    if a.params.n != b.params.n or a.params.mu != b.params.mu:
        raise ValidationError("ensemble distance needs matching (n, mu)")
    total = 0.0
    skipped = 0.0
    for ba, bb in zip(a.blocks, b.blocks):
        if ba.weight <= NEGLIGIBLE_WEIGHT:
            skipped += ba.weight
            continue
        total += ba.weight * trace_norm(ba.matrix - bb.matrix)
    return total + 2.0 * skipped


def coherent_vector_distance(
    j: HalfInteger, u: LocalParam, n: int, trunc: FockTruncation
) -> float:
    """Distance between the embedded spin coherent vector and its coherent target.

    The target amplitude scales with the block actually used: sqrt(2j/n) plays
    the role of sqrt(2 mu - 1) so the comparison stays meaningful across the
    whole concentration set.
    """
    w = u.scaled(1.0 / math.sqrt(n))
    if w.norm >= math.pi / 2:
        raise TruncationError(f"|u|/sqrt(n) = {w.norm:.4f} outside the coordinate branch")
    spin_vec = spin_coherent_coords(j, w)
    z = math.sqrt(j.twoj / n) * u.alpha
    dim = max(trunc.dim, j.dim)
    target = coherent_coefficients(z, dim)
    padded = np.zeros(dim, dtype=complex)
    padded[: j.dim] = spin_vec
    return float(np.linalg.norm(padded - target))


def composition_defect(j: HalfInteger, u: LocalParam, v: LocalParam, n: int) -> float:
    """Trace distance between composing two scaled rotations and rotating once.

    Both states are pure, so the distance is 2 sqrt(1 - |overlap|^2) with the
    overlap of U_j(u/sqrt(n)) |j, v/sqrt(n)> against |j, (u+v)/sqrt(n)>.
    """
    from .irreps import rotation_unitary

    s = 1.0 / math.sqrt(n)
    psi = rotation_unitary(j, u.scaled(s)) @ spin_coherent_coords(j, v.scaled(s))
    chi = spin_coherent_coords(j, (u + v).scaled(s))
    inner = np.vdot(chi, psi)
    overlap = min(abs(inner), 1.0)
    # 1 - |ov| through the phase-aligned difference: stable when the states
    # nearly coincide, where 1 - |<chi|psi>| drowns in rounding
    phase = inner / abs(inner) if abs(inner) > 0 else 1.0
    one_minus = 0.5 * float(np.linalg.norm(psi - chi * phase) ** 2)
    return 2.0 * math.sqrt(max(0.0, one_minus * (1.0 + overlap)))


@dataclass(frozen=True)
class PointStats:
    """Distances for one (n, u) grid point."""

    n: int
    u: LocalParam
    forward: float
    block_max: float
    reverse: float


@dataclass(frozen=True)
class ConvergenceRecord:
    """Per-n summary of a convergence sweep plus the per-point detail."""

    n: int
    mu: float
    epsilon: float
    grid: tuple[LocalParam, ...]
    forward_sup: float
    forward_argmax: LocalParam
    block_sup: float
    block_argmax: LocalParam
    reverse_sup: float
    reverse_argmax: LocalParam
    excluded_weight: float
    trunc_dim: int
    tail_bound: float
    points: tuple[PointStats, ...] = field(repr=False)


@dataclass(frozen=True)
class SweepSettings:
    """Configuration of a convergence sweep."""

    mu: float
    n_values: tuple[int, ...]
    u_grid: tuple[LocalParam, ...]
    epsilon: float = 0.1
    restrict_to_concentration: bool = False
    trunc_dim: int | None = None
    workers: int = 1


def _sweep_truncation(settings: SweepSettings, params: ModelParams) -> FockTruncation:
    if settings.trunc_dim:
        return FockTruncation(settings.trunc_dim, params.p ** settings.trunc_dim)
    u_max = max(pt.norm for pt in settings.u_grid)
    trunc = default_truncation(params, u_max)
    if not settings.restrict_to_concentration:
        # every block up to j = n/2 enters the channel sum
        dim_needed = params.n + 1
        if trunc.dim < dim_needed:
            trunc = FockTruncation(dim_needed, trunc.tail_bound)
    return trunc


def _sweep_point(args) -> PointStats:
    settings, n, u = args
    params = ModelParams(n, settings.mu, settings.epsilon)
    trunc = _sweep_truncation(settings, params)
    ens = ensemble(params, u)
    phi = displaced_thermal(u, settings.mu, trunc)
    js = concentration_set(params)
    included = js if settings.restrict_to_concentration else None
    t_out = forward_channel(ens, trunc, js=included)
    forward = trace_norm(t_out.matrix - phi.matrix)
    jset = set(js)
    block_max = 0.0
    for b in ens.blocks:
        if b.j not in jset:
            continue
        emb = embed_block(b.matrix, EmbeddingMap(b.j, trunc))
        block_max = max(block_max, trace_norm(emb.matrix - phi.matrix))
    s_out = inverse_channel(phi, params)
    reverse = ensemble_distance(ens, s_out)
    return PointStats(n=n, u=u, forward=forward, block_max=block_max, reverse=reverse)


def convergence_sweep(settings: SweepSettings) -> list[ConvergenceRecord]:
    """Run the forward/reverse distance experiment over the (n, u) grid."""
    tasks = [(settings, n, u) for n in settings.n_values for u in settings.u_grid]
    workers = settings.workers or 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1)) as pool:
            stats = list(pool.map(_sweep_point, tasks, chunksize=1))
    else:
        stats = [_sweep_point(t) for t in tasks]
    records = []
    for n in settings.n_values:
        pts = tuple(s for s in stats if s.n == n)
        params = ModelParams(n, settings.mu, settings.epsilon)
        trunc = _sweep_truncation(settings, params)
        excluded = 0.0
        if settings.restrict_to_concentration:
            jset = set(concentration_set(params))
            excluded = sum(
                block_weight(params, j) for j in valid_spins(n) if j not in jset
            )
        fwd = max(pts, key=lambda s: s.forward)
        blk = max(pts, key=lambda s: s.block_max)
        rev = max(pts, key=lambda s: s.reverse)
        records.append(
            ConvergenceRecord(
                n=n,
                mu=settings.mu,
                epsilon=settings.epsilon,
                grid=settings.u_grid,
                forward_sup=fwd.forward,
                forward_argmax=fwd.u,
                block_sup=blk.block_max,
                block_argmax=blk.u,
                reverse_sup=rev.reverse,
                reverse_argmax=rev.u,
                excluded_weight=excluded,
                trunc_dim=trunc.dim,
                tail_bound=trunc.tail_bound,
                points=pts,
            )
        )
    return records
