"""
Convex closure of the output entropy, S_Ω(σ) = inf Σ_j p_j S(Ω(φ_j)),
estimated from above by derivative-free search over ensemble decompositions.

Every ensemble of m pure states realising σ = Σ_i μ_i |u_i⟩⟨u_i| comes from an
m×r isometry (the purification freedom), so the search runs over isometries
built from phased Givens rotations. Only pure decompositions are searched;
concavity of S∘Ω makes that lossless.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from channels import apply, identity_channel, tensor
from entropy import INEQ_TOL, GainCertificate, von_neumann, weighted_output_entropy
from errors import DimensionError, IsometryError, NormalizationError
from mathcore import SUPPORT_TOL, as_matrix, as_vector, dagger, hermitian_eig, make_rng, max_abs, mix_seed, partial_trace, projector
from states import correlated_state, density_from_matrix

logger = logging.getLogger(__name__)

ISOMETRY_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-8
MAX_ITERATIONS = 10_000
STALL_ITERATIONS = 50
STALL_IMPROVEMENT = 1e-9
INITIAL_STEP = 0.25
ROOF_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Ensemble:
    weights: np.ndarray
    members: tuple

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        members = tuple(as_vector(v) for v in self.members)
        if len(weights) != len(members):
            raise DimensionError(f"{len(weights)} weights for {len(members)} members")
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-10:
            raise NormalizationError("ensemble weights must be nonnegative and sum to 1")
        for j, v in enumerate(members):
            if abs(np.linalg.norm(v) - 1) > 1e-10:
                raise NormalizationError(f"ensemble member {j} is not a unit vector")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "members", members)

    def state(self):
        return sum(w * projector(v) for w, v in zip(self.weights, self.members))


@dataclass(frozen=True, eq=False)
class RoofEstimate:
    value: float
    ensemble: Ensemble
    restarts: int
    converged: bool
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class Corollary1Result:
    """(a) gain ≥ Σπ_n S(Ω(h_n)), (b) roof ≤ Σπ_n S(Ω(h_n)), (c) gain - roof"""
    certificate: GainCertificate
    roof: RoofEstimate
    weak_rhs: float
    roof_dominated: bool
    conjecture_margin: float

    @property
    def passed(self):
        return self.certificate.passed and self.roof_dominated


@dataclass(frozen=True, eq=False)
class ConjectureReport:
    gain: float
    roof: RoofEstimate
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.gain - self.roof.value

    @property
    def verdict(self):
        # roof.value only bounds S_Ω from above, so a negative margin proves nothing
        return "SUPPORTED" if self.margin >= -self.tolerance else "INCONCLUSIVE"


def ensemble_objective(ens, omega):
    if omega.dim_in != len(ens.members[0]):
        raise DimensionError(f"channel input {omega.dim_in} does not match members of length {len(ens.members[0])}")
    return float(sum(
        w * von_neumann(apply(omega, projector(v)))
        for w, v in zip(ens.weights, ens.members)
        if w > 0
    ))


def _support(sigma):
    eig = hermitian_eig(as_matrix(getattr(sigma, "matrix", sigma)))
    keep = eig.eigenvalues > SUPPORT_TOL
    return eig.eigenvalues[keep], eig.eigenvectors[:, keep]


def _members(scaled_basis, mix):
    """Columns φ̃_j = Σ_i conj(mix_ji) √μ_i u_i"""
    return scaled_basis @ np.conj(mix).T


def _ensemble_from_columns(columns):
    # Member weights are the squared column norms; drop empty members
    weights = np.sum(np.abs(columns) ** 2, axis=0)
    keep = weights > SUPPORT_TOL**2
    weights, columns = weights[keep], columns[:, keep]
    members = tuple((columns[:, j] / np.sqrt(weights[j])) for j in range(columns.shape[1]))
    return Ensemble(weights=weights / weights.sum(), members=members)


def hjw_ensemble(sigma, mix):
    mu, u = _support(sigma)
    mix = as_matrix(mix)
    rank = len(mu)
    if mix.shape[1] != rank or mix.shape[0] < rank:
        raise IsometryError(f"mix must be m×{rank} with m ≥ {rank}, got {mix.shape}")
    deviation = max_abs(dagger(mix) @ mix - np.eye(rank))
    if deviation > ISOMETRY_TOL:
        raise IsometryError(f"mix columns deviate from orthonormality by {deviation:.3e}")

    ens = _ensemble_from_columns(_members(u * np.sqrt(mu), mix))
    # Verify the ensemble averages back to sigma
    target = as_matrix(getattr(sigma, "matrix", sigma))
    if max_abs(ens.state() - target) > RECONSTRUCTION_TOL:
        raise IsometryError("ensemble does not reconstruct the target state")
    return ens


def givens_pairs(m, rank):
    """Rotation planes (c, q), c < rank, q > c; enough to reach every m×rank isometry"""
    return [(c, q) for c in range(rank) for q in range(c + 1, m)]


def isometry_from_angles(x, m, rank):
    """First `rank` columns of Π G(c, q; θ, φ) · diag(exp(iα)); x = 0 gives the identity columns"""
    pairs = givens_pairs(m, rank)
    thetas = x[0:2 * len(pairs):2]
    phis = x[1:2 * len(pairs):2]
    alphas = x[2 * len(pairs):]
    # rotation coefficients for every plane at once
    cos, sin = np.cos(thetas), np.sin(thetas)
    phase = np.exp(1j * phis)
    mix = np.zeros((m, rank), dtype=np.complex128)
    mix[np.arange(rank), np.arange(rank)] = np.exp(1j * alphas)
    # apply the rotations right to left
    for k in range(len(pairs) - 1, -1, -1):
        c, q = pairs[k]
        row_c, row_q = mix[c].copy(), mix[q]
        mix[c] = cos[k] * row_c - np.conj(phase[k]) * sin[k] * row_q
        mix[q] = phase[k] * sin[k] * row_c + cos[k] * row_q
    return mix


def batch_entropy(spectra, cutoff=SUPPORT_TOL):
    """Row-wise -Σ w log w over eigenvalues above the cutoff"""
    safe = np.where(spectra > cutoff, spectra, 1.0)
    return -np.sum(safe * np.log(safe), axis=-1)


def _objective_factory(mu, u, omega, m):
    scaled = u * np.sqrt(mu)
    rank = len(mu)
    # (num_kraus, dim_out, dim_in)
    kraus = np.stack(omega.kraus_ops)

    def objective(x):
        columns = _members(scaled, isometry_from_angles(x, m, rank))
        weights = np.sum(np.abs(columns) ** 2, axis=0)
        keep = weights > SUPPORT_TOL**2
        columns, weights = columns[:, keep], weights[keep]
        # V_a φ_j for every Kraus operator and member
        images = np.einsum("aoi,ij->jao", kraus, columns)
        outputs = np.einsum("jao,jap->jop", images, images.conj()) / weights[:, None, None]
        return float(weights @ batch_entropy(np.linalg.eigvalsh(outputs)))

    return objective


class _Stalled(Exception):
    pass


def _local_search(objective, x0, max_iterations, stall_iterations, stall_improvement, step=INITIAL_STEP):
    """
    One Nelder–Mead run from x0.

    The callback counts iterations and stops the run once `stall_iterations`
    of them improve the best value by less than `stall_improvement`.
    """
    x0 = np.asarray(x0, dtype=float)
    best = {"x": x0, "f": objective(x0)}
    progress = {"iterations": 0, "checkpoint": best["f"]}

    def tracked(x):
        f = objective(x)
        if f < best["f"]:
            best["x"], best["f"] = np.array(x, copy=True), f
        return f

    def callback(_xk):
        progress["iterations"] += 1
        if progress["iterations"] % stall_iterations:
            return
        if progress["checkpoint"] - best["f"] < stall_improvement:
            raise _Stalled()
        progress["checkpoint"] = best["f"]

    # Initialize the simplex with a fixed angular step along every axis
    simplex = np.vstack([x0, x0 + step * np.eye(len(x0))])
    try:
        res = minimize(
            tracked,
            x0,
            method="Nelder-Mead",
            callback=callback,
            options={
                "maxiter": max_iterations,
                "initial_simplex": simplex,
                "adaptive": True,
                "xatol": 1e-10,
                "fatol": 1e-12,
            },
        )
        converged = bool(res.success)
    except _Stalled:
        converged = True
    return best["x"], best["f"], converged, progress["iterations"]


def _check_witness(witness, sigma):
    target = as_matrix(getattr(sigma, "matrix", sigma))
    if len(witness.members[0]) != target.shape[0]:
        raise DimensionError(f"witness members of length {len(witness.members[0])} do not fit a state of size {target.shape[0]}")
    if max_abs(witness.state() - target) > RECONSTRUCTION_TOL:
        raise IsometryError("witness ensemble does not reconstruct the target state")


def roof_upper_bound(
    sigma,
    omega,
    m=None,
    restarts=1,
    seed=0,
    witnesses=(),
    workers=1,
    max_iterations=MAX_ITERATIONS,
    stall_iterations=STALL_ITERATIONS,
    stall_improvement=STALL_IMPROVEMENT,
):
    """
    Upper bound on S_Ω(σ) from `restarts` local searches.

    Restart 0 starts from the eigen-ensemble; restart i > 0 from random angles
    seeded by mix_seed(seed, i). Optional `witnesses` are explicit ensembles of σ
    whose objective also competes for the minimum.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if omega.dim_in != as_matrix(getattr(sigma, "matrix", sigma)).shape[0]:
        raise DimensionError("channel input dimension does not match the state")
    for witness in witnesses:
        _check_witness(witness, sigma)
    # Work on the support of sigma; m defaults to rank squared
    mu, u = _support(sigma)
    rank = len(mu)
    m = m or rank**2
    if m < rank:
        raise DimensionError(f"ensemble size {m} is below rank {rank}")

    if rank == 1:
        ens = Ensemble(weights=[1.0], members=(u[:, 0],))
        return RoofEstimate(value=ensemble_objective(ens, omega), ensemble=ens, restarts=restarts, converged=True)

    objective = _objective_factory(mu, u, omega, m)
    # one (θ, φ) pair per Givens plane plus one phase per support vector
    n_params = 2 * len(givens_pairs(m, rank)) + rank

    def run(index):
        if index == 0:
            x0 = np.zeros(n_params)
        else:
            x0 = make_rng(mix_seed(seed, index)).uniform(-np.pi, np.pi, n_params)
        return _local_search(objective, x0, max_iterations, stall_iterations, stall_improvement)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(i) for i in range(restarts)]

    # ties go to the earliest restart
    best_index = min(range(restarts), key=lambda i: (results[i][1], i))
    best_x, best_f, converged, _ = results[best_index]
    iterations = sum(r[3] for r in results)
    ensemble = _ensemble_from_columns(_members(u * np.sqrt(mu), isometry_from_angles(best_x, m, rank)))
    value = float(best_f)
    logger.debug(f"roof search: best restart {best_index} value {value:.12f} after {iterations} iterations")
    if not converged:
        logger.warning(f"roof search hit the iteration cap with value {value:.12f}")

    # explicit witness ensembles compete on equal terms
    for witness in witnesses:
        witness_value = ensemble_objective(witness, omega)
        if witness_value < value:
            value, ensemble = witness_value, witness
    return RoofEstimate(value=value, ensemble=ensemble, restarts=restarts, converged=converged, iterations=iterations)


def spec_witness(spec):
    """The ensemble {π_n, h_n} of Tr_H ρ for a correlated state"""
    weights = spec.weights
    keep = weights > 0
    return Ensemble(
        weights=weights[keep] / weights[keep].sum(),
        members=tuple(h for h, k in zip(spec.vectors, keep) if k),
    )


def check_corollary1(spec, omega, m=None, restarts=4, seed=0, tol=INEQ_TOL, roof_tol=ROOF_TOL, workers=1):
    rho = correlated_state(spec)
    chan = tensor(identity_channel(spec.dim_h), omega)
    gain = von_neumann(apply(chan, rho)) - von_neumann(rho)
    weak_rhs = weighted_output_entropy(spec.weights, spec.vectors, omega)
    sigma = density_from_matrix(partial_trace(rho.matrix, spec.dim_h, spec.dim_k, keep="K"))
    roof = roof_upper_bound(
        sigma, omega, m=m, restarts=restarts, seed=seed, witnesses=(spec_witness(spec),), workers=workers
    )
    roof_dominated = bool(roof.value <= weak_rhs + roof_tol)
    certificate = GainCertificate(
        theorem="cor1",
        lhs=gain,
        rhs=weak_rhs,
        tolerance=tol,
        dims={"dim_h": spec.dim_h, "dim_k": spec.dim_k, "kraus": omega.num_kraus},
        details={"roof_value": roof.value, "roof_dominated": roof_dominated, "conjecture_margin": gain - roof.value},
    )
    return Corollary1Result(
        certificate=certificate,
        roof=roof,
        weak_rhs=weak_rhs,
        roof_dominated=roof_dominated,
        conjecture_margin=gain - roof.value,
    )


def probe_conjecture(rho, dim_h, dim_k, omega, m=None, restarts=4, seed=0, tol=INEQ_TOL, witnesses=(), workers=1):
    """S((Id⊗Ω)ρ) - S(ρ) against the roof estimate of Tr_H ρ"""
    matrix = as_matrix(getattr(rho, "matrix", rho))
    if matrix.shape[0] != dim_h * dim_k:
        raise DimensionError(f"state of size {matrix.shape[0]} is not bipartite over {dim_h}x{dim_k}")
    if omega.dim_in != dim_k:
        raise DimensionError(f"channel input {omega.dim_in} does not match dim_k={dim_k}")
    state = density_from_matrix(matrix, subsystems=(dim_h, dim_k))
    gain = von_neumann(apply(tensor(identity_channel(dim_h), omega), state)) - von_neumann(state)
    sigma = density_from_matrix(partial_trace(matrix, dim_h, dim_k, keep="K"))
    roof = roof_upper_bound(sigma, omega, m=m, restarts=restarts, seed=seed, witnesses=witnesses, workers=workers)
    return ConjectureReport(gain=gain, roof=roof, tolerance=tol, details={"dim_h": dim_h, "dim_k": dim_k})
