"""
Dense complex-matrix primitives
Kronecker products, partial trace, Hermitian eigendecomposition, PSD testing,
the discrete Fourier transform pair, and reproducible seeding.
"""

import os
from dataclasses import dataclass

import numpy as np
from dotenv import load_dotenv

from errors import ConvergenceError, DimensionError, HermiticityError, InputError

load_dotenv()

# Library-wide tolerances, overridable per call
EIG_TOL = float(os.getenv("QDEPH_EIG_TOL", "1e-10"))
SUPPORT_TOL = float(os.getenv("QDEPH_SUPPORT_TOL", "1e-12"))

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order, eigenvectors as unitary columns"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_matrix(m):
    """Coerce to a finite complex128 2-D array"""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"expected a matrix, got an array with {arr.ndim} dimensions")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has NaN or infinite entries")
    return arr


def as_vector(v):
    arr = np.asarray(v, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InputError("vector has NaN or infinite entries")
    return arr


def max_abs(a):
    """Entrywise max norm, 0 for empty input"""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(a):
    return np.conj(np.transpose(a))


def projector(v):
    v = as_vector(v)
    return np.outer(v, v.conj())


def kron(a, b):
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dim_h, dim_k, keep="K"):
    """Trace out one factor of H⊗K; keep="K" returns Tr_H, keep="H" returns Tr_K"""
    m = as_matrix(m)
    n = dim_h * dim_k
    if m.shape != (n, n):
        raise DimensionError(f"matrix of shape {m.shape} is not {n}x{n} for dims {dim_h}x{dim_k}")
    # Index as (h, k, h', k') and contract the traced pair
    blocks = m.reshape(dim_h, dim_k, dim_h, dim_k)
    if keep == "K":
        return np.einsum("ijik->jk", blocks)
    if keep == "H":
        return np.einsum("ijkj->ik", blocks)
    raise ValueError(f"keep must be 'H' or 'K', got {keep!r}")


def is_hermitian(a, tol=EIG_TOL):
    a = as_matrix(a)
    return a.shape[0] == a.shape[1] and max_abs(a - dagger(a)) <= tol


def hermitian_eig(a, tol=EIG_TOL):
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"eigendecomposition needs a square matrix, got {a.shape}")
    if not is_hermitian(a, tol):
        raise HermiticityError(f"matrix deviates from its adjoint by {max_abs(a - dagger(a)):.3e}")
    # symmetrise away roundoff before handing to LAPACK
    try:
        w, u = np.linalg.eigh((a + dagger(a)) / 2)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"Hermitian eigensolver did not converge: {e}") from e
    # eigh sorts ascending
    return EigenDecomposition(eigenvalues=w[::-1].copy(), eigenvectors=u[:, ::-1].copy())


def psd_check(a, tol=EIG_TOL):
    eig = hermitian_eig(a, tol=max(tol, EIG_TOL))
    # smallest eigenvalue is last
    return bool(eig.eigenvalues[-1] >= -tol)


def _weights(pi):
    return np.asarray(getattr(pi, "weights", pi), dtype=float).reshape(-1)


def _fourier_kernel(n, sign):
    idx = np.arange(n)
    return np.exp(sign * 2j * np.pi * np.outer(idx, idx) / n)


def dft_sequence(pi):
    """λ_n = Σ_k exp(2πink/N) π_k, by direct summation"""
    weights = _weights(pi)
    return _fourier_kernel(len(weights), +1) @ weights.astype(np.complex128)


def inverse_dft_sequence(lam):
    """
    Candidate distribution π_k = (1/N) Σ_n exp(-2πink/N) λ_n.

    Returns (real parts, imaginary parts); a genuine phase-damping sequence
    has vanishing imaginary parts, which classify_phase_damping checks.
    """
    lam = as_vector(lam)
    n = len(lam)
    values = _fourier_kernel(n, -1) @ lam / n
    # split so the caller can inspect the imaginary residue
    return values.real.copy(), values.imag.copy()


def mix_seed(master_seed, index):
    """Stable 64-bit seed for item `index` under `master_seed` (splitmix64 finaliser)"""
    # Step the splitmix64 state to the item, then scramble
    z = (int(master_seed) + (int(index) + 1) * _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def make_rng(seed):
    """Counter-based generator, reproducible across platforms for a given seed"""
    return np.random.Generator(np.random.Philox(int(seed) & _MASK64))


def complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_isometry(rng, rows, cols):
    """Haar-distributed isometry (rows >= cols) via QR of a complex Gaussian matrix"""
    z = complex_gaussian(rng, (rows, cols))
    q, r = np.linalg.qr(z)
    # fix the phase freedom of QR so the distribution is exactly Haar
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_unit_vector(rng, dim):
    v = complex_gaussian(rng, dim)
    return v / np.linalg.norm(v)
