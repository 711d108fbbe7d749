"""
Density matrices and the correlated bipartite state family
ρ = Σ_{n,m} c_{nm} |e_n⟩⟨e_m| ⊗ |h_n⟩⟨h_m| together with its support projection.
"""

from dataclasses import dataclass, field

import numpy as np

from errors import DimensionError, NormalizationError, StateError
from mathcore import (
    EIG_TOL,
    as_matrix,
    as_vector,
    complex_gaussian,
    dagger,
    hermitian_eig,
    is_hermitian,
    make_rng,
    max_abs,
    random_unit_vector,
)

NORM_TOL = 1e-10
# Below this amplitude a block of a pure vector carries no direction
AMPLITUDE_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    subsystems: tuple = None

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def dim_h(self):
        return self.subsystems[0] if self.subsystems else None

    @property
    def dim_k(self):
        return self.subsystems[1] if self.subsystems else None

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class CorrelatedStateSpec:
    """Trace-one PSD coefficient matrix plus one unit vector h_n per row"""
    coeff: np.ndarray
    vectors: tuple

    def __post_init__(self):
        coeff = as_matrix(self.coeff)
        vectors = tuple(as_vector(h) for h in self.vectors)
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "vectors", vectors)

        if not vectors:
            raise StateError("correlated state needs at least one vector h_n", field="vectors")
        if coeff.shape != (len(vectors), len(vectors)):
            raise DimensionError(
                f"coefficient matrix {coeff.shape} does not match {len(vectors)} vectors"
            )
        if len({len(h) for h in vectors}) != 1:
            raise DimensionError("vectors h_n must share one dimension")
        _check_unit_vectors(vectors)
        if not is_hermitian(coeff, EIG_TOL):
            raise StateError("coefficient matrix is not Hermitian", field="coeff")
        eig = hermitian_eig(coeff)
        if eig.eigenvalues[-1] < -EIG_TOL:
            raise StateError(
                f"coefficient matrix has eigenvalue {eig.eigenvalues[-1]:.3e} < 0", field="coeff"
            )
        if abs(np.trace(coeff) - 1) > EIG_TOL:
            raise StateError(
                f"coefficient matrix has trace {np.trace(coeff).real:.12f}, expected 1", field="coeff"
            )

    @property
    def dim_h(self):
        return len(self.vectors)

    @property
    def dim_k(self):
        return len(self.vectors[0])

    @property
    def weights(self):
        """π_n = c_nn"""
        return np.real(np.diag(self.coeff)).copy()


@dataclass(frozen=True, eq=False)
class PureStateDecomposition:
    amplitudes: np.ndarray
    vectors: tuple = field(default_factory=tuple)

    def to_state(self):
        return pure_correlated_state(self.amplitudes, self.vectors)


def _check_unit_vectors(vectors):
    for n, h in enumerate(vectors):
        norm = np.linalg.norm(h)
        if abs(norm - 1) > NORM_TOL:
            raise NormalizationError(f"vector h_{n} has norm {norm:.12f}, expected 1")


def _embedding(vectors):
    """Columns e_n ⊗ h_n; W C W† is the correlated state with coefficients C"""
    dim_h, dim_k = len(vectors), len(vectors[0])
    w = np.zeros((dim_h * dim_k, dim_h), dtype=np.complex128)
    for n, h in enumerate(vectors):
        w[n * dim_k:(n + 1) * dim_k, n] = h
    return w


def density_from_matrix(m, tol=EIG_TOL, subsystems=None):
    """Validate a matrix as a state, clamping eigenvalues in [-tol, 0) to zero"""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise StateError(f"density matrix must be square, got {m.shape}", field="shape")
    if subsystems is not None:
        subsystems = tuple(int(d) for d in subsystems)
        if int(np.prod(subsystems)) != m.shape[0]:
            raise DimensionError(f"subsystem dims {subsystems} do not multiply to {m.shape[0]}")
    if not is_hermitian(m, tol):
        raise StateError(
            f"matrix is not Hermitian (deviation {max_abs(m - dagger(m)):.3e})", field="hermiticity"
        )
    eig = hermitian_eig(m, tol)
    w = eig.eigenvalues
    if w[-1] < -tol:
        raise StateError(f"matrix has negative eigenvalue {w[-1]:.3e}", field="positivity")
    trace = float(np.sum(w))
    if abs(trace - 1) > tol:
        raise StateError(f"matrix has trace {trace:.12f}, expected 1", field="trace")

    if w[-1] < 0:
        w = np.clip(w, 0, None)
        w = w / np.sum(w)
        matrix = (eig.eigenvectors * w) @ dagger(eig.eigenvectors)
    else:
        matrix = (m + dagger(m)) / 2
        matrix = matrix / np.real(np.trace(matrix))
    return DensityMatrix(matrix=matrix, subsystems=subsystems)


def correlated_state(spec):
    w = _embedding(spec.vectors)
    return density_from_matrix(w @ spec.coeff @ dagger(w), subsystems=(spec.dim_h, spec.dim_k))


def pure_correlated_state(nu, hs):
    """|e⟩⟨e| with |e⟩ = Σ_n ν_n e_n ⊗ h_n"""
    nu = as_vector(nu)
    hs = tuple(as_vector(h) for h in hs)
    if len(nu) != len(hs):
        raise DimensionError(f"{len(nu)} amplitudes but {len(hs)} vectors")
    total = float(np.sum(np.abs(nu) ** 2))
    if abs(total - 1) > NORM_TOL:
        raise NormalizationError(f"amplitudes have squared norm {total:.12f}, expected 1")
    _check_unit_vectors(hs)
    e = _embedding(hs) @ nu
    return density_from_matrix(np.outer(e, e.conj()), subsystems=(len(hs), len(hs[0])))


def dephase_then_correlate(corr, nu, hs):
    """(Φ⊗Id)(|e⟩⟨e|) written directly as a correlated state with c_nm = Λ_nm ν_n ν̄_m"""
    kernel = as_matrix(getattr(corr, "entries", corr))
    nu = as_vector(nu)
    if kernel.shape != (len(nu), len(nu)):
        raise DimensionError(f"kernel {kernel.shape} does not match {len(nu)} amplitudes")
    total = float(np.sum(np.abs(nu) ** 2))
    if abs(total - 1) > NORM_TOL:
        raise NormalizationError(f"amplitudes have squared norm {total:.12f}, expected 1")
    coeff = kernel * np.outer(nu, nu.conj())
    return correlated_state(CorrelatedStateSpec(coeff=coeff, vectors=tuple(hs)))


def decompose_pure(e, dim_h, dim_k):
    e = as_vector(e)
    if len(e) != dim_h * dim_k:
        raise DimensionError(f"vector of length {len(e)} is not in a {dim_h}x{dim_k} space")
    norm = np.linalg.norm(e)
    if abs(norm - 1) > NORM_TOL:
        raise NormalizationError(f"vector has norm {norm:.12f}, expected 1")

    blocks = e.reshape(dim_h, dim_k)
    amplitudes = np.linalg.norm(blocks, axis=1).astype(np.complex128)
    fallback = np.zeros(dim_k, dtype=np.complex128)
    fallback[0] = 1
    vectors = []
    for n in range(dim_h):
        if abs(amplitudes[n]) > AMPLITUDE_CUTOFF:
            vectors.append(blocks[n] / amplitudes[n].real)
        else:
            amplitudes[n] = 0
            vectors.append(fallback.copy())
    # renormalise after zeroing negligible blocks
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    return PureStateDecomposition(amplitudes=amplitudes, vectors=tuple(vectors))


def support_projection(hs, dim_h):
    """P = Σ_n |e_n⟩⟨e_n| ⊗ |h_n⟩⟨h_n|"""
    hs = tuple(as_vector(h) for h in hs)
    if len(hs) != dim_h:
        raise DimensionError(f"{len(hs)} vectors given for dim_h={dim_h}")
    _check_unit_vectors(hs)
    w = _embedding(hs)
    return w @ dagger(w)


def product_state(a, b):
    return density_from_matrix(
        np.kron(a.matrix, b.matrix), subsystems=(a.dim, b.dim)
    )


def random_unit_vectors(count, dim, seed):
    rng = make_rng(seed)
    return tuple(random_unit_vector(rng, dim) for _ in range(count))


def random_correlated_spec(dim_h, dim_k, seed):
    """Normalised Gram matrix of Gaussian vectors plus Gaussian unit vectors h_n"""
    if dim_h < 1 or dim_k < 1:
        raise DimensionError("dimensions must be at least 1")
    rng = make_rng(seed)
    g = complex_gaussian(rng, (dim_h, dim_h))
    coeff = g @ dagger(g)
    coeff = coeff / np.real(np.trace(coeff))
    vectors = tuple(random_unit_vector(rng, dim_k) for _ in range(dim_h))
    return CorrelatedStateSpec(coeff=coeff, vectors=vectors)


def random_density(d, seed, rank=None):
    if d < 1:
        raise DimensionError("dimension must be at least 1")
    rng = make_rng(seed)
    g = complex_gaussian(rng, (d, rank or d))
    rho = g @ dagger(g)
    return density_from_matrix(rho / np.real(np.trace(rho)))
