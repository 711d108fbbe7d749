"""
Kraus-form quantum channels

Constructors for dephasing channels (Schur multipliers in a fixed basis),
phase-damping channels classified by a distribution on Z_N, truncated
circle-measure (Toeplitz) dephasing, tensor products, composition and the
Choi-matrix equality oracle.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import circulant, toeplitz

from errors import CorrelationError, DimensionError, MeasureError, TPError
from mathcore import (
    EIG_TOL,
    SUPPORT_TOL,
    as_matrix,
    as_vector,
    complex_gaussian,
    dagger,
    dft_sequence,
    haar_isometry,
    hermitian_eig,
    inverse_dft_sequence,
    is_hermitian,
    make_rng,
    max_abs,
    psd_check,
)
from states import density_from_matrix

logger = logging.getLogger(__name__)

TP_TOL = 1e-9
CHOI_TOL = 1e-10
DISTRIBUTION_TOL = 1e-10
CLASSIFY_SUM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    dim_in: int
    dim_out: int
    kraus_ops: tuple

    @property
    def num_kraus(self):
        return len(self.kraus_ops)

    def __repr__(self):
        return f"QuantumChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, num_kraus={self.num_kraus})"


@dataclass(frozen=True, eq=False)
class ProbabilityDistribution:
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if weights.size == 0:
            raise MeasureError("distribution needs at least one weight")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise MeasureError("distribution weights must be finite and nonnegative")
        if abs(weights.sum() - 1) > DISTRIBUTION_TOL:
            raise MeasureError(f"distribution weights sum to {weights.sum():.12f}, expected 1")
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class CircleMeasure:
    """Finitely atomic probability measure on the circle, angles t in [0, 1)"""
    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(w), float(t)) for w, t in self.atoms)
        if not atoms:
            raise MeasureError("measure needs at least one atom")
        weights = np.array([w for w, _ in atoms])
        angles = np.array([t for _, t in atoms])
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise MeasureError("atom weights must be finite and nonnegative")
        if np.any(angles < 0) or np.any(angles >= 1):
            raise MeasureError("atom angles must lie in [0, 1)")
        if abs(weights.sum() - 1) > DISTRIBUTION_TOL:
            raise MeasureError(f"atom weights sum to {weights.sum():.12f}, expected 1")
        object.__setattr__(self, "atoms", atoms)

    def fourier(self, j):
        """λ_j = Σ_a w_a exp(2πi j t_a)"""
        return sum(w * np.exp(2j * np.pi * j * t) for w, t in self.atoms)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """PSD Hermitian kernel with unit diagonal; Λ_nm multiplies |e_n⟩⟨e_m|"""
    entries: np.ndarray

    def __post_init__(self):
        entries = as_matrix(self.entries)
        if entries.shape[0] != entries.shape[1]:
            raise CorrelationError(f"kernel must be square, got {entries.shape}")
        if not is_hermitian(entries, EIG_TOL):
            raise CorrelationError("kernel is not Hermitian")
        if np.any(np.abs(np.diag(entries) - 1) > EIG_TOL):
            raise CorrelationError("kernel diagonal must be identically 1")
        if not psd_check(entries, EIG_TOL):
            raise CorrelationError("kernel is not positive semidefinite")
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class NotPhaseDamping:
    """Classification verdict: λ is not the Fourier transform of a distribution"""
    index: int
    value: float
    reason: str


def make_channel(kraus, tol=TP_TOL):
    ops = tuple(as_matrix(k) for k in kraus)
    if not ops:
        raise DimensionError("a channel needs at least one Kraus operator")
    shape = ops[0].shape
    for j, op in enumerate(ops):
        if op.shape != shape:
            raise DimensionError(f"Kraus operator {j} has shape {op.shape}, expected {shape}")
    dim_out, dim_in = shape
    # Check trace preservation: Σ V†V = I
    gram = sum(dagger(op) @ op for op in ops)
    deviation = max_abs(gram - np.eye(dim_in))
    if deviation > tol:
        raise TPError(f"Σ V†V deviates from the identity by {deviation:.3e}")
    return QuantumChannel(dim_in=dim_in, dim_out=dim_out, kraus_ops=ops)


def apply_operator(chan, m):
    """Σ_j V_j m V_j† for an arbitrary operator m"""
    m = as_matrix(m)
    if m.shape != (chan.dim_in, chan.dim_in):
        raise DimensionError(f"operator of shape {m.shape} does not fit input dimension {chan.dim_in}")
    return sum(op @ m @ dagger(op) for op in chan.kraus_ops)


def apply(chan, rho):
    matrix = getattr(rho, "matrix", rho)
    out = apply_operator(chan, matrix)
    # |Tr((Σ V†V - I) ρ)| ≤ dim_in · TP_TOL for any channel make_channel accepts
    trace = np.real(np.trace(out))
    if abs(trace - 1) <= chan.dim_in * TP_TOL:
        out = out / trace
    return density_from_matrix(out)


def choi(chan):
    """(Id ⊗ chan) applied to Σ_ij |ii⟩⟨jj|"""
    d = chan.dim_in
    # Build the Choi matrix block by block from the matrix units
    c = np.zeros((d * chan.dim_out, d * chan.dim_out), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=np.complex128)
            unit[i, j] = 1
            c += np.kron(unit, apply_operator(chan, unit))
    return c


def choi_distance(a, b):
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        return float("inf")
    return max_abs(choi(a) - choi(b))


def channels_equal(a, b, tol=CHOI_TOL):
    return choi_distance(a, b) <= tol


def tensor(a, b):
    return make_channel([np.kron(x, y) for x in a.kraus_ops for y in b.kraus_ops])


def compose(outer, inner):
    """outer ∘ inner"""
    if inner.dim_out != outer.dim_in:
        raise DimensionError(f"cannot compose: inner output {inner.dim_out} != outer input {outer.dim_in}")
    return make_channel([x @ y for x in outer.kraus_ops for y in inner.kraus_ops])


def identity_channel(d):
    return make_channel([np.eye(d)])


def _weyl_operators(d):
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    for a in range(d):
        for b in range(d):
            yield (a, b), np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)


def depolarizing_channel(d, p):
    """ρ ↦ (1-p)ρ + p Tr(ρ) I/d through the d² Weyl operators"""
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {p}")
    kraus = []
    for (a, b), w in _weyl_operators(d):
        weight = (1 - p + p / d**2) if (a, b) == (0, 0) else p / d**2
        if weight > 0:
            kraus.append(np.sqrt(weight) * w)
    return make_channel(kraus)


def random_channel(d, num_kraus, seed):
    """Kraus blocks of a Haar isometry C^d → C^d ⊗ C^num_kraus"""
    rng = make_rng(seed)
    v = haar_isometry(rng, d * num_kraus, d)
    # rows of v are indexed by (output, environment)
    blocks = v.reshape(d, num_kraus, d)
    return make_channel([blocks[:, j, :] for j in range(num_kraus)])


def random_unital_channel(d, num_kraus, seed):
    """Random mixture of Haar unitaries"""
    rng = make_rng(seed)
    weights = rng.dirichlet(np.ones(num_kraus))
    return make_channel([np.sqrt(w) * haar_isometry(rng, d, d) for w in weights])


def dephasing_channel(corr):
    """Diagonal Kraus operators V_k = diag(√μ_k w_k) from Λ = Σ_k μ_k w_k w_k†"""
    if not isinstance(corr, CorrelationMatrix):
        corr = CorrelationMatrix(corr)
    eig = hermitian_eig(corr.entries)
    # One diagonal Kraus operator per eigenvector in the support of the kernel
    kraus = [
        np.diag(np.sqrt(mu) * eig.eigenvectors[:, k])
        for k, mu in enumerate(eig.eigenvalues)
        if mu > SUPPORT_TOL
    ]
    dropped = corr.dim - len(kraus)
    if dropped:
        logger.debug(f"dephasing channel on dim {corr.dim}: dropped {dropped} null eigenvectors of the kernel")
    return make_channel(kraus)


def phase_damping_kernel(pi):
    """Circulant kernel Λ_nm = λ_{n-m mod N}, λ = DFT of π"""
    return circulant(dft_sequence(pi))


def phase_damping_channel(pi):
    if not isinstance(pi, ProbabilityDistribution):
        pi = ProbabilityDistribution(pi)
    return dephasing_channel(CorrelationMatrix(phase_damping_kernel(pi)))


def shift_unitary(n):
    """U|e_k⟩ = exp(2πik/N)|e_k⟩"""
    return np.diag(np.exp(2j * np.pi * np.arange(n) / n))


def shift_representation(pi):
    """Φ(ρ) = Σ_k π_k U^k ρ U^{-k}"""
    if not isinstance(pi, ProbabilityDistribution):
        pi = ProbabilityDistribution(pi)
    n = len(pi)
    u = shift_unitary(n)
    kraus = [
        np.sqrt(w) * np.linalg.matrix_power(u, k)
        for k, w in enumerate(pi.weights)
        if w > 0
    ]
    return make_channel(kraus)


def toeplitz_kernel(mu, dim):
    column = np.array([mu.fourier(j) for j in range(dim)])
    row = np.array([mu.fourier(-j) for j in range(dim)])
    return toeplitz(column, row)


def toeplitz_dephasing(mu, dim):
    if not isinstance(mu, CircleMeasure):
        mu = CircleMeasure(mu)
    if dim < 1:
        raise DimensionError("dimension must be at least 1")
    return dephasing_channel(CorrelationMatrix(toeplitz_kernel(mu, dim)))


def diagonal_unitary_mixture(mu, dim):
    """Σ_a w_a U_{t_a} ρ U_{t_a}† with U_t = diag(exp(2πint))"""
    if not isinstance(mu, CircleMeasure):
        mu = CircleMeasure(mu)
    n = np.arange(dim)
    kraus = [np.sqrt(w) * np.diag(np.exp(2j * np.pi * n * t)) for w, t in mu.atoms if w > 0]
    return make_channel(kraus)


def is_positive_definite_sequence(lam, tol=EIG_TOL):
    """(ν, Tν) ≥ 0 for all ν, with T the circulant built from λ"""
    lam = as_vector(lam)
    kernel = circulant(lam)
    if not is_hermitian(kernel, tol):
        return False
    return psd_check(kernel, tol)


def classify_phase_damping(lam, tol=EIG_TOL):
    """
    Decide whether λ is the Fourier transform of a distribution on Z_N

    Returns the ProbabilityDistribution when it is, otherwise a NotPhaseDamping
    naming the worst offending index.
    """
    lam = as_vector(lam)
    candidates, imaginary = inverse_dft_sequence(lam)

    # Reject on imaginary residue first, then negativity, then normalisation

    worst_imag = int(np.argmax(np.abs(imaginary)))
    if abs(imaginary[worst_imag]) > tol:
        return NotPhaseDamping(index=worst_imag, value=float(imaginary[worst_imag]), reason="imaginary")

    worst = int(np.argmin(candidates))
    if candidates[worst] < -tol:
        return NotPhaseDamping(index=worst, value=float(candidates[worst]), reason="negative")

    total = float(np.sum(candidates))
    if abs(total - 1) > CLASSIFY_SUM_TOL:
        return NotPhaseDamping(index=0, value=total, reason="normalization")

    # clamp roundoff negatives before renormalising
    weights = np.clip(candidates, 0, None)
    return ProbabilityDistribution(weights / weights.sum())


def random_distribution(n, seed):
    rng = make_rng(seed)
    return ProbabilityDistribution(rng.dirichlet(np.ones(n)))


def random_circle_measure(num_atoms, seed):
    rng = make_rng(seed)
    weights = rng.dirichlet(np.ones(num_atoms))
    angles = rng.uniform(0, 1, num_atoms)
    return CircleMeasure(tuple(zip(weights, angles)))


def random_correlation(dim, seed, rank=None):
    """Unit-diagonal normalisation D^{-1/2} G D^{-1/2} of a random Gram matrix"""
    rng = make_rng(seed)
    g = complex_gaussian(rng, (dim, rank or dim))
    gram = g @ dagger(g)
    # rescale to unit diagonal
    scale = 1 / np.sqrt(np.real(np.diag(gram)))
    kernel = gram * np.outer(scale, scale)
    np.fill_diagonal(kernel, 1)
    return CorrelationMatrix(kernel)
