"""
Entropy functionals and entropy-gain bounds

All entropies are in nats. Each bound returns a GainCertificate carrying the
raw lhs/rhs so tolerances can be re-applied without recomputation.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from channels import apply, apply_operator, identity_channel, tensor, dephasing_channel
from errors import DimensionError, SupportError
from mathcore import SUPPORT_TOL, as_matrix, dagger, hermitian_eig, max_abs, projector
from states import correlated_state, dephase_then_correlate, pure_correlated_state

logger = logging.getLogger(__name__)

INEQ_TOL = 1e-8
SUPPORT_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class GainCertificate:
    theorem: str
    lhs: float
    rhs: float
    tolerance: float
    seed: int = None
    dims: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.lhs - self.rhs

    @property
    def passed(self):
        return bool(self.margin >= -self.tolerance)


def spectrum_entropy(eigenvalues, cutoff=SUPPORT_TOL):
    w = np.asarray(eigenvalues, dtype=float)
    w = w[w > cutoff]
    return float(-np.sum(w * np.log(w)))


def _matrix_of(rho):
    return as_matrix(getattr(rho, "matrix", rho))


def von_neumann(rho):
    """S(ρ) = -Tr ρ log ρ"""
    return max(spectrum_entropy(hermitian_eig(_matrix_of(rho)).eigenvalues), 0.0)


def support_log(a, cutoff=SUPPORT_TOL):
    """log a on its support, and the support projector"""
    eig = hermitian_eig(as_matrix(a))
    keep = eig.eigenvalues > cutoff
    u = eig.eigenvectors[:, keep]
    log_a = (u * np.log(eig.eigenvalues[keep])) @ dagger(u)
    return log_a, u @ dagger(u)


def relative_entropy(rho, sigma, cutoff=SUPPORT_TOL):
    """S(ρ‖σ) = Tr ρ(log ρ - log σ); +inf when supp ρ ⊄ supp σ"""
    r, s = _matrix_of(rho), _matrix_of(sigma)
    if r.shape != s.shape:
        raise DimensionError(f"states of shapes {r.shape} and {s.shape} cannot be compared")
    log_s, support = support_log(s, cutoff)
    leak = np.real(np.trace(r @ (np.eye(len(r)) - support)))
    if leak > cutoff:
        logger.debug(f"relative entropy is infinite: {leak:.3e} of the first state lies outside supp σ")
        return float("inf")
    value = -von_neumann(r) - np.real(np.trace(r @ log_s))
    return float(value)


def entropy_gain(chan, rho):
    return von_neumann(apply(chan, rho)) - von_neumann(rho)


def is_subunital(chan, tol=SUPPORT_CHECK_TOL):
    """Ω(I) ≤ I"""
    if chan.dim_in != chan.dim_out:
        return False
    gap = np.eye(chan.dim_out) - apply_operator(chan, np.eye(chan.dim_in))
    return bool(hermitian_eig(gap).eigenvalues[-1] >= -tol)


def holevo_gain_bound(chan, rho, tol=INEQ_TOL):
    """S(Ω(ρ)) - S(ρ) ≥ -Tr(ρ log Ω(I))"""
    if chan.dim_in != chan.dim_out:
        raise DimensionError("the identity bound needs equal input and output dimensions")
    r = _matrix_of(rho)
    omega_i = apply_operator(chan, np.eye(chan.dim_in))
    log_oi, support = support_log(omega_i)
    # the bound is only defined when ρ lives inside supp Ω(I)
    if max_abs(support @ r @ support - r) > SUPPORT_CHECK_TOL:
        raise SupportError("supp ρ is not contained in supp Ω(I)")

    out = apply(chan, rho)
    rhs = -float(np.real(np.trace(r @ log_oi)))
    details = {
        "subunital": is_subunital(chan),
        "output_weighted_rhs": -float(np.real(np.trace(out.matrix @ log_oi))),
    }
    if details["subunital"]:
        details["rhs_nonnegative"] = bool(rhs >= -SUPPORT_CHECK_TOL)
    else:
        logger.debug(f"identity bound on a channel with Ω(I) not below I: rhs {rhs:.3e} has no sign guarantee")
    lhs = von_neumann(out) - von_neumann(r)
    return GainCertificate(theorem="eq3", lhs=lhs, rhs=rhs, tolerance=tol, details=details)


def projection_gain_bound(chan, rho, p, tol=INEQ_TOL):
    """S(Ω(ρ)) - S(ρ) ≥ -Tr(Ω(ρ) log Ω(P)) whenever Pρ = ρP = ρ"""
    r, p = _matrix_of(rho), as_matrix(p)
    if p.shape != r.shape:
        raise DimensionError(f"projection {p.shape} does not match state {r.shape}")
    if max_abs(p @ r - r) > SUPPORT_CHECK_TOL or max_abs(r @ p - r) > SUPPORT_CHECK_TOL:
        raise SupportError("supp ρ is not contained in supp P")

    out = apply(chan, rho)
    log_op, _ = support_log(apply_operator(chan, p))
    rhs = -float(np.real(np.trace(out.matrix @ log_op)))
    lhs = von_neumann(out) - von_neumann(r)
    return GainCertificate(theorem="prop1", lhs=lhs, rhs=rhs, tolerance=tol)


def _check_dims(spec, omega):
    if omega.dim_in != spec.dim_k:
        raise DimensionError(f"channel input {omega.dim_in} does not match dim_k={spec.dim_k}")


def weighted_output_entropy(weights, vectors, omega):
    """Σ_n π_n S(Ω(|h_n⟩⟨h_n|))"""
    return float(sum(
        w * von_neumann(apply(omega, projector(h)))
        for w, h in zip(weights, vectors)
        if w > 0
    ))


def theorem1_rhs(spec, omega):
    _check_dims(spec, omega)
    rho = correlated_state(spec)
    return von_neumann(rho) + weighted_output_entropy(spec.weights, spec.vectors, omega)


def check_theorem1(spec, omega, tol=INEQ_TOL):
    _check_dims(spec, omega)
    rho = correlated_state(spec)
    lhs = von_neumann(apply(tensor(identity_channel(spec.dim_h), omega), rho))
    return GainCertificate(
        theorem="thm1",
        lhs=lhs,
        rhs=theorem1_rhs(spec, omega),
        tolerance=tol,
        dims={"dim_h": spec.dim_h, "dim_k": spec.dim_k, "kraus": omega.num_kraus},
    )


def check_corollary2(corr, nu, hs, omega, tol=INEQ_TOL):
    """S((Φ⊗Ω)|e⟩⟨e|) ≥ S((Φ⊗Id)|e⟩⟨e|) + Σ_n |ν_n|² S(Ω(|h_n⟩⟨h_n|))"""
    nu = np.asarray(nu, dtype=np.complex128)
    hs = tuple(hs)
    if omega.dim_in != len(hs[0]):
        raise DimensionError(f"channel input {omega.dim_in} does not match vectors of length {len(hs[0])}")
    phi = dephasing_channel(corr)
    pure = pure_correlated_state(nu, hs)
    lhs = von_neumann(apply(tensor(phi, omega), pure))
    dephased = dephase_then_correlate(corr, nu, hs)
    rhs = von_neumann(dephased) + weighted_output_entropy(np.abs(nu) ** 2, hs, omega)
    return GainCertificate(
        theorem="cor2",
        lhs=lhs,
        rhs=rhs,
        tolerance=tol,
        dims={"dim_h": len(hs), "dim_k": len(hs[0]), "kraus": omega.num_kraus},
    )
