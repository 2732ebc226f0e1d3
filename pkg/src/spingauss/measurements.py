"""Statistical consequences: discrimination, estimation risk, measurement TV.

Three experiment families live here.

* Binary discrimination between the ensembles at +u and -u: the optimal test
  projects onto the positive part of the difference, so the minimal error
  probability follows from the trace norm, blockwise for ensembles.  The
  matching oscillator limit and the single-quadrature baseline are closed
  forms.

* Heterodyne estimation risk: the mean squared error of the coherent-state
  POVM on the displaced thermal family, by deterministic quadrature or by
  seeded importance-sampling Monte Carlo, always against the numerically
  computed outcome density.

* Covariant versus pulled-back heterodyne outcome densities on each spin
  block, and their total-variation distance.

Outcome densities live on the plane of local parameters.  The covariant
measurement's outcomes are sphere directions; they are pulled to the plane
through the polar angle theta = 2|u|/sqrt(n), which is injective for
|u| < pi sqrt(n)/2, with Jacobian factor (2/(sqrt(n)|u|)) sin(2|u|/sqrt(n)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, DomainError, ValidationError
from .irreps import HalfInteger, LocalParam, rotation_columns, _spin_coherent_rows
from .oscillator import FockTruncation, PolarGrid, _coherent_rows, heterodyne_pdf
from .qubit_model import (
    EnsembleState,
    ModelParams,
    concentration_set,
    ensemble,
    log_block_weight,
)

NEGLIGIBLE_WEIGHT = 1e-14


@dataclass(frozen=True)
class BinaryTestResult:
    """Outcome of an optimal binary discrimination."""

    risk: float
    optimal_projector_rank: int
    n: int | None = None
    u: LocalParam | None = None
    mu: float | None = None


def _pair_risk(rho_plus: np.ndarray, rho_minus: np.ndarray) -> tuple[float, int]:
    diff = np.asarray(rho_plus, dtype=complex) - np.asarray(rho_minus, dtype=complex)
    eigs = np.linalg.eigvalsh(diff)
    tnorm = float(np.abs(eigs).sum())
    rank = int(np.sum(eigs > 0))
    return 0.5 * (1.0 - 0.5 * tnorm), rank


def helstrom_risk(rho_plus, rho_minus) -> BinaryTestResult:
    """Minimal error probability for equal priors, 1/2 (1 - ||r+ - r-||_1 / 2).

    Accepts a pair of density matrices or a pair of EnsembleState objects with
    identical block structure; ensembles are handled blockwise, multiplicity
    spaces cancel.
    """
    if isinstance(rho_plus, EnsembleState) or isinstance(rho_minus, EnsembleState):
        if not (isinstance(rho_plus, EnsembleState) and isinstance(rho_minus, EnsembleState)):
            raise ValidationError("mixing an ensemble with a bare matrix")
        pa, pb = rho_plus.params, rho_minus.params
        if pa.n != pb.n or pa.mu != pb.mu:
            raise ValidationError("ensembles must share block structure (same n, mu)")
        tnorm = 0.0
        rank = 0
        for ba, bb in zip(rho_plus.blocks, rho_minus.blocks):
            if ba.weight <= NEGLIGIBLE_WEIGHT:
                tnorm += 2.0 * ba.weight
                continue
            eigs = np.linalg.eigvalsh(ba.matrix - bb.matrix)
            tnorm += ba.weight * float(np.abs(eigs).sum())
            rank += int(np.sum(eigs > 0))
        return BinaryTestResult(
            risk=0.5 * (1.0 - 0.5 * tnorm),
            optimal_projector_rank=rank,
            n=pa.n,
            u=rho_plus.u,
            mu=pa.mu,
        )
    risk, rank = _pair_risk(rho_plus, rho_minus)
    return BinaryTestResult(risk=risk, optimal_projector_rank=rank)


def discrimination_limit(u: LocalParam) -> float:
    """Limit risk for the pure case: (1 - sqrt(1 - e^{-4|u|^2})) / 2."""
    return 0.5 * (1.0 - math.sqrt(-math.expm1(-4.0 * u.norm ** 2)))


def finite_n_discrimination(params: ModelParams, u: LocalParam) -> BinaryTestResult:
    """Optimal risk for separating the ensembles at +u and -u."""
    return helstrom_risk(ensemble(params, u), ensemble(params, -u))


def position_measurement_risk(u: LocalParam) -> float:
    """Risk of thresholding a single quadrature: 1/2 - erf(|u|)/2.

    Uses the half-normalized error function integral of e^{-t^2}/sqrt(pi).
    """
    return 0.5 - 0.5 * math.erf(u.norm)


def heterodyne_risk_reference(mu: float) -> float:
    """Derived closed form mu/(2 mu - 1)^2 for the heterodyne mean square error."""
    return mu / (2.0 * mu - 1.0) ** 2


def heterodyne_outcome_std(mu: float) -> float:
    """Per-axis standard deviation sqrt(mu/2)/(2 mu - 1) of the outcome density."""
    return math.sqrt(mu / 2.0) / (2.0 * mu - 1.0)


@dataclass(frozen=True)
class McSpec:
    """Seeded Monte Carlo settings; the proposal scale multiplies the outcome std."""

    seed: int
    samples: int = 200_000
    proposal_scale: float = 1.6


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    error_bound: float
    method: str
    mass: float          # estimated total outcome probability captured
    seed: int | None = None


def _risk_truncation(mu: float, u: LocalParam, radius: float) -> FockTruncation:
    reach = (math.sqrt(2.0 * mu - 1.0) * (u.norm + radius) + 6.0) ** 2
    p = (1.0 - mu) / mu
    dim_thermal = 1 if p == 0 else math.ceil(math.log(1e-10) / math.log(p))
    return FockTruncation(max(32, math.ceil(reach), dim_thermal))


def heterodyne_estimation_risk(
    mu: float,
    u: LocalParam = LocalParam(0.0, 0.0),
    quad: PolarGrid | None = None,
    mc: McSpec | None = None,
    trunc: FockTruncation | None = None,
) -> RiskEstimate:
    """Mean squared error E||u_hat - u||^2 of the heterodyne measurement.

    Deterministic quadrature of the computed outcome density by default; with
    ``mc`` given, importance sampling against a Gaussian proposal instead.
    The outcome density itself always comes from the truncated operators, so
    neither path assumes the Gaussian closed form.
    """
    sig = heterodyne_outcome_std(mu)
    if quad is None:
        quad = PolarGrid(center=(u.ux, u.uy), radius=8.0 * sig, n_radial=160, n_angular=128)
    if trunc is None:
        trunc = _risk_truncation(mu, u, quad.radius)
    if mc is None:
        pts, w = quad.nodes()
        dens = heterodyne_pdf(pts, u, mu, trunc)
        sq = (pts[:, 0] - u.ux) ** 2 + (pts[:, 1] - u.uy) ** 2
        value = float(np.sum(w * sq * dens))
        mass = float(np.sum(w * dens))
        # resolution estimate: repeat at half the radial order
        coarse = PolarGrid(quad.center, quad.radius, max(2, quad.n_radial // 2), quad.n_angular)
        cpts, cw = coarse.nodes()
        cdens = heterodyne_pdf(cpts, u, mu, trunc)
        csq = (cpts[:, 0] - u.ux) ** 2 + (cpts[:, 1] - u.uy) ** 2
        resolution = abs(float(np.sum(cw * csq * cdens)) - value)
        tail = math.exp(-quad.radius ** 2 / (2.0 * sig * sig))
        bound = resolution + tail * (quad.radius ** 2 + 4 * sig * sig) + (1.0 - mass) * quad.radius ** 2
        if bound > 0.02 * max(value, 1e-12):
            raise AccuracyError(
                f"quadrature risk error bound {bound:.3e} above 2% of value {value:.3e}"
            )
        return RiskEstimate(value=value, error_bound=bound, method="quadrature", mass=mass)
    rng = np.random.default_rng(mc.seed)
    sp = mc.proposal_scale * sig
    pts = rng.standard_normal((mc.samples, 2)) * sp + np.array([u.ux, u.uy])
    sq = (pts[:, 0] - u.ux) ** 2 + (pts[:, 1] - u.uy) ** 2
    proposal = np.exp(-sq / (2.0 * sp * sp)) / (2.0 * math.pi * sp * sp)
    if trunc is not None:
        mc_trunc = trunc
    else:
        mc_trunc = _risk_truncation(mu, u, math.sqrt(sq.max()))
    dens = heterodyne_pdf(pts, u, mu, mc_trunc)
    weights = dens / proposal
    vals = sq * weights
    value = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(mc.samples))
    return RiskEstimate(
        value=value,
        error_bound=3.0 * stderr,
        method="monte-carlo",
        mass=float(weights.mean()),
        seed=mc.seed,
    )


def heterodyne_samples(
    mu: float, u: LocalParam, mc: McSpec, trunc: FockTruncation | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Importance-sampled outcome points and weights for the heterodyne density."""
    rng = np.random.default_rng(mc.seed)
    sig = heterodyne_outcome_std(mu)
    sp = mc.proposal_scale * sig
    pts = rng.standard_normal((mc.samples, 2)) * sp + np.array([u.ux, u.uy])
    sq = (pts[:, 0] - u.ux) ** 2 + (pts[:, 1] - u.uy) ** 2
    proposal = np.exp(-sq / (2.0 * sp * sp)) / (2.0 * math.pi * sp * sp)
    if trunc is None:
        trunc = _risk_truncation(mu, u, math.sqrt(sq.max()))
    dens = heterodyne_pdf(pts, u, mu, trunc)
    return pts, dens / proposal


def injectivity_radius(n: int) -> float:
    """Largest |u| for which the plane point determines the sphere direction."""
    return math.pi * math.sqrt(n) / 2.0


def plane_jacobian(n: int, radii: np.ndarray) -> np.ndarray:
    """Pushforward factor (2/(sqrt(n) r)) sin(2 r / sqrt(n)), with its r -> 0 limit."""
    return (4.0 / n) * np.sinc(2.0 * np.asarray(radii, dtype=float) / (math.sqrt(n) * math.pi))


def _as_points(u_hat) -> tuple[np.ndarray, bool]:
    if isinstance(u_hat, LocalParam):
        return np.array([[u_hat.ux, u_hat.uy]]), True
    pts = np.asarray(u_hat, dtype=float)
    if pts.ndim == 1:
        return pts.reshape(1, 2), True
    return pts.reshape(-1, 2), False


def covariant_block_density(j: HalfInteger, n: int, rho_j: np.ndarray, u_hat):
    """Outcome density of the covariant block measurement on the plane.

    (2j+1)/(4 pi) <j, u/sqrt(n)| rho_j |j, u/sqrt(n)> times the plane Jacobian.
    Integrating over the disk |u| < pi sqrt(n)/2 against d^2 u resolves the
    identity, so a unit-trace block yields total mass one.
    """
    pts, scalar = _as_points(u_hat)
    radii = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(radii >= injectivity_radius(n)):
        raise DomainError(
            f"|u_hat| must stay below pi sqrt(n)/2 = {injectivity_radius(n):.3f}"
        )
    sq = math.sqrt(n)
    rows = _spin_coherent_rows(j.twoj, pts[:, 0] / sq, pts[:, 1] / sq, j.dim)
    rho = np.asarray(rho_j, dtype=complex)
    vals = np.einsum("gi,ij,gj->g", rows.conj(), rho, rows).real
    dens = (j.dim / (4.0 * math.pi)) * vals * plane_jacobian(n, radii)
    return float(dens[0]) if scalar else dens


def heterodyne_pullback_density(
    j: HalfInteger, rho_j: np.ndarray, mu: float, u_hat, trunc: FockTruncation | None = None
):
    """Heterodyne outcome density pulled back through the block embedding.

    Only the coherent components inside the block's image contribute:
    (2 mu - 1)/pi |<z_uhat| V_j rho V_j^dag |z_uhat>| truncated to 2j+1 rows.
    Wrap-around copies of the density sit at distance 2 pi sqrt(n) and are
    dropped; their Gaussian bound is far below every tolerance used here.
    """
    pts, scalar = _as_points(u_hat)
    z = math.sqrt(2.0 * mu - 1.0) * (-pts[:, 1] + 1j * pts[:, 0])
    rows = _coherent_rows(z, j.dim)
    rho = np.asarray(rho_j, dtype=complex)
    vals = np.einsum("gi,ij,gj->g", rows.conj(), rho, rows).real
    dens = (2.0 * mu - 1.0) / math.pi * vals
    return float(dens[0]) if scalar else dens


@dataclass(frozen=True)
class OutcomeDensityField:
    """Both outcome densities over one grid, with block weights, for one (n, u)."""

    n: int
    mu: float
    u: LocalParam
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    covariant: np.ndarray = field(repr=False)
    heterodyne: np.ndarray = field(repr=False)
    block_weights: tuple[float, ...]


@dataclass(frozen=True)
class TvEstimate:
    """Total-variation comparison of the two measurements at one (n, u)."""

    n: int
    mu: float
    u: LocalParam
    tv_bound: float               # grid term plus worst-case excluded weight term
    grid_term: float
    concentration_deficit: float
    covariant_mass: float
    heterodyne_mass: float
    out_of_grid_bound: float


def default_tv_grid(mu: float, u: LocalParam, n_min: int) -> PolarGrid:
    # Gauss-Legendre radial nodes keep the quadrature error near rounding for
    # these Gaussian-tailed densities already at modest node counts
    sig = heterodyne_outcome_std(mu)
    radius = 6.0 * sig + 3.0
    limit = 0.98 * injectivity_radius(n_min) - u.norm
    return PolarGrid(center=(u.ux, u.uy), radius=min(radius, limit), n_radial=64, n_angular=96)


def _effective_rank(p: float, dim: int) -> int:
    if p == 0.0:
        return 1
    return min(dim, math.ceil(math.log(1e-15) / math.log(p)) + 1)


def _row_support(peak: float, dim: int) -> int:
    return min(dim, math.ceil(peak + 10.0 * math.sqrt(peak + 4.0) + 25.0))


def _block_density_pair(
    params: ModelParams,
    j: HalfInteger,
    u: LocalParam,
    pts: np.ndarray,
    radii: np.ndarray,
    jac: np.ndarray,
    coh_rows_grid: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Covariant and pulled-back densities of the rotated block, low-rank route.

    The unrotated block's spectrum decays geometrically, so the rotated block
    is reconstructed from the leading columns of the rotation, and the spin
    coherent and coherent grid vectors are truncated to the rows where they
    have support.  Both truncations sit at the 1e-15 level, far below the
    quadrature resolution.
    """
    n, mu, p = params.n, params.mu, params.p
    sq = math.sqrt(n)
    d = j.dim
    rank = _effective_rank(p, d)
    if p == 0.0:
        lam = np.ones(1)
    else:
        lam = (1.0 - p) * p ** np.arange(rank) / (1.0 - p ** d)
    # the rank-truncated rotation columns carry all the support that matters:
    # the inner products need grid-vector rows only where those columns live
    peak_a = rank + 2.0 * j.twoj * math.sin(min(u.norm / sq, math.pi / 2.0)) ** 2
    rows_a = min(d, math.ceil(peak_a + 12.0 * math.sqrt(peak_a + 4.0) + 30.0))
    a_conj = rotation_columns(j, u.scaled(1.0 / sq), cols=rank, rows=rows_a).conj()
    w_m = _spin_coherent_rows(j.twoj, pts[:, 0] / sq, pts[:, 1] / sq, rows_a)
    b_m = w_m @ a_conj
    dens_m = (d / (4.0 * math.pi)) * ((b_m.real ** 2 + b_m.imag ** 2) @ lam) * jac
    rows_h = min(rows_a, coh_rows_grid.shape[1])
    b_h = coh_rows_grid[:, :rows_h] @ a_conj[:rows_h, :]
    dens_h = (2.0 * mu - 1.0) / math.pi * ((b_h.real ** 2 + b_h.imag ** 2) @ lam)
    return dens_m, dens_h


def outcome_density_field(
    params: ModelParams, u: LocalParam, grid: PolarGrid | None = None
) -> OutcomeDensityField:
    """Mixture outcome densities over the concentration set on one grid."""
    if grid is None:
        grid = default_tv_grid(params.mu, u, params.n)
    pts, w = grid.nodes()
    radii = np.hypot(pts[:, 0], pts[:, 1])
    if radii.max() >= injectivity_radius(params.n):
        raise DomainError("grid leaves the injectivity disk; shrink its radius")
    jac = plane_jacobian(params.n, radii)
    zmag = math.sqrt(2.0 * params.mu - 1.0) * radii.max()
    coh_dim = _row_support(zmag * zmag, params.n + 1)
    z = math.sqrt(2.0 * params.mu - 1.0) * (-pts[:, 1] + 1j * pts[:, 0])
    coh_rows_grid = _coherent_rows(z, coh_dim)
    total_m = np.zeros(len(pts))
    total_h = np.zeros(len(pts))
    weights = []
    for j in concentration_set(params):
        logw = log_block_weight(params, j)
        bw = 0.0 if logw == -math.inf else math.exp(logw)
        weights.append(bw)
        if bw <= NEGLIGIBLE_WEIGHT:
            continue
        dens_m, dens_h = _block_density_pair(params, j, u, pts, radii, jac, coh_rows_grid)
        total_m += bw * dens_m
        total_h += bw * dens_h
    return OutcomeDensityField(
        n=params.n,
        mu=params.mu,
        u=u,
        points=pts,
        weights=w,
        covariant=total_m,
        heterodyne=total_h,
        block_weights=tuple(weights),
    )


def measurement_tv_distance(
    params: ModelParams, u: LocalParam, grid: PolarGrid | None = None
) -> TvEstimate:
    """Weighted total variation between the two outcome densities.

    Sums p_n(j) * integral |covariant - heterodyne| over the grid for spins in
    the concentration set, then adds twice the excluded weight as the worst
    case contribution of the remaining blocks.
    """
    if grid is None:
        grid = default_tv_grid(params.mu, u, params.n)
    pts, w = grid.nodes()
    radii = np.hypot(pts[:, 0], pts[:, 1])
    if radii.max() >= injectivity_radius(params.n):
        raise DomainError("grid leaves the injectivity disk; shrink its radius")
    jac = plane_jacobian(params.n, radii)
    zmag = math.sqrt(2.0 * params.mu - 1.0) * radii.max()
    coh_dim = _row_support(zmag * zmag, params.n + 1)
    z = math.sqrt(2.0 * params.mu - 1.0) * (-pts[:, 1] + 1j * pts[:, 0])
    coh_rows_grid = _coherent_rows(z, coh_dim)
    grid_term = 0.0
    mass_m = 0.0
    mass_h = 0.0
    included = 0.0
    for j in concentration_set(params):
        logw = log_block_weight(params, j)
        bw = 0.0 if logw == -math.inf else math.exp(logw)
        if bw <= NEGLIGIBLE_WEIGHT:
            continue
        dens_m, dens_h = _block_density_pair(params, j, u, pts, radii, jac, coh_rows_grid)
        grid_term += bw * float(np.sum(w * np.abs(dens_m - dens_h)))
        mass_m += bw * float(np.sum(w * dens_m))
        mass_h += bw * float(np.sum(w * dens_h))
        included += bw
    deficit = max(0.0, 1.0 - included)
    out_of_grid = max(0.0, included - mass_m) + max(0.0, included - mass_h)
    return TvEstimate(
        n=params.n,
        mu=params.mu,
        u=u,
        tv_bound=grid_term + 2.0 * deficit,
        grid_term=grid_term,
        concentration_deficit=deficit,
        covariant_mass=mass_m / included if included else 0.0,
        heterodyne_mass=mass_h / included if included else 0.0,
        out_of_grid_bound=out_of_grid,
    )


def measurement_tv_sweep(
    mu: float,
    n_values: tuple[int, ...],
    u_list: tuple[LocalParam, ...],
    epsilon: float = 0.1,
    grids: dict | None = None,
) -> list[TvEstimate]:
    """TV comparison over an (n, u) grid, looping spins outside the u loop.

    Produces the same numbers as measurement_tv_distance per point (identical
    per-block arithmetic and ascending-j accumulation), but the cached
    per-spin rotation eigensystem is reused across the whole u grid, which is
    where the time goes at large n.
    """
    out = []
    for n in n_values:
        params = ModelParams(n, mu, epsilon)
        per_u = []
        for u in u_list:
            grid = (grids or {}).get((n, u)) or default_tv_grid(mu, u, n)
            pts, w = grid.nodes()
            radii = np.hypot(pts[:, 0], pts[:, 1])
            if radii.max() >= injectivity_radius(n):
                raise DomainError("grid leaves the injectivity disk; shrink its radius")
            jac = plane_jacobian(n, radii)
            zmag = math.sqrt(2.0 * mu - 1.0) * radii.max()
            coh_dim = _row_support(zmag * zmag, n + 1)
            z = math.sqrt(2.0 * mu - 1.0) * (-pts[:, 1] + 1j * pts[:, 0])
            per_u.append(
                {
                    "u": u,
                    "pts": pts,
                    "w": w,
                    "radii": radii,
                    "jac": jac,
                    "coh": _coherent_rows(z, coh_dim),
                    "grid_term": 0.0,
                    "mass_m": 0.0,
                    "mass_h": 0.0,
                    "included": 0.0,
                }
            )
        for j in concentration_set(params):
            logw = log_block_weight(params, j)
            bw = 0.0 if logw == -math.inf else math.exp(logw)
            if bw <= NEGLIGIBLE_WEIGHT:
                continue
            for acc in per_u:
                dens_m, dens_h = _block_density_pair(
                    params, j, acc["u"], acc["pts"], acc["radii"], acc["jac"], acc["coh"]
                )
                acc["grid_term"] += bw * float(np.sum(acc["w"] * np.abs(dens_m - dens_h)))
                acc["mass_m"] += bw * float(np.sum(acc["w"] * dens_m))
                acc["mass_h"] += bw * float(np.sum(acc["w"] * dens_h))
                acc["included"] += bw
        for acc in per_u:
            included = acc["included"]
            deficit = max(0.0, 1.0 - included)
            out.append(
                TvEstimate(
                    n=n,
                    mu=mu,
                    u=acc["u"],
                    tv_bound=acc["grid_term"] + 2.0 * deficit,
                    grid_term=acc["grid_term"],
                    concentration_deficit=deficit,
                    covariant_mass=acc["mass_m"] / included if included else 0.0,
                    heterodyne_mass=acc["mass_h"] / included if included else 0.0,
                    out_of_grid_bound=max(0.0, included - acc["mass_m"])
                    + max(0.0, included - acc["mass_h"]),
                )
            )
    return out
