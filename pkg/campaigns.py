"""
Randomized verification campaigns

Each trial i draws its own instance from seed = mix_seed(master_seed, i), so a
campaign is reproducible trial by trial and independent of how trials are
scheduled across worker threads.
"""

import csv
import dataclasses
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from dotenv import load_dotenv

from channels import (
    CHOI_TOL,
    ProbabilityDistribution,
    apply,
    choi_distance,
    classify_phase_damping,
    dephasing_channel,
    depolarizing_channel,
    diagonal_unitary_mixture,
    identity_channel,
    phase_damping_channel,
    random_channel,
    random_circle_measure,
    random_correlation,
    random_distribution,
    random_unital_channel,
    shift_representation,
    tensor,
    toeplitz_dephasing,
    toeplitz_kernel,
)
from codec import certificate_to_dict, dump_json, load_json
from entropy import (
    GainCertificate,
    check_corollary2,
    check_theorem1,
    holevo_gain_bound,
    projection_gain_bound,
    relative_entropy,
)
from errors import ConfigError, InputError
from mathcore import dagger, dft_sequence, make_rng, max_abs, mix_seed, psd_check, random_unit_vector
from roof import check_corollary1, probe_conjecture, roof_upper_bound
from states import (
    CorrelatedStateSpec,
    correlated_state,
    dephase_then_correlate,
    pure_correlated_state,
    random_correlated_spec,
    random_density,
    random_unit_vectors,
    support_projection,
)

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_TOL = float(os.getenv("QDEPH_INEQ_TOL", "1e-8"))
DEFAULT_WORKERS = int(os.getenv("QDEPH_WORKERS", "1"))
MAX_TOTAL_DIM = 64
EXACT_TOL = 1e-10
BOUND_ZERO_TOL = 1e-9

THEOREMS = ("eq3", "prop1", "thm1", "cor1", "cor2", "thm4", "thm5", "conjecture", "monotonicity")
THEOREM_BACKED = frozenset(THEOREMS) - {"conjecture"}
# certificates of these compare Choi matrices, not entropies
CHOI_THEOREMS = frozenset({"thm4", "thm5"})
FORMATS = ("json", "csv")
CSV_COLUMNS = ("trial", "seed", "lhs", "rhs", "margin", "pass")
INTERPRETATION = (
    "Theorem-backed trials must never fail; a failure points to an implementation bug. "
    "Conjecture trials are exploratory: INCONCLUSIVE is not a counterexample."
)


@dataclass(frozen=True)
class CampaignConfig:
    theorem: str
    trials: int = 1
    dim_h: int = 2
    dim_k: int = 2
    num_kraus: int = 2
    tolerance: float = DEFAULT_TOL
    master_seed: int = 0
    roof_m: int = None
    roof_restarts: int = 2
    output: str = None
    output_format: str = "json"
    vary_dims: bool = False
    workers: int = DEFAULT_WORKERS

    def validate(self):
        if self.theorem not in THEOREMS:
            raise ConfigError(f"unknown theorem {self.theorem!r}; expected one of {', '.join(THEOREMS)}", field="theorem")
        for name in ("trials", "dim_h", "dim_k", "num_kraus", "roof_restarts", "workers"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}", field=name)
        if self.roof_m is not None and (not isinstance(self.roof_m, int) or self.roof_m < 1):
            raise ConfigError(f"roof_m must be a positive integer, got {self.roof_m!r}", field="roof_m")
        if not isinstance(self.tolerance, (int, float)) or not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance!r}", field="tolerance")
        if not isinstance(self.master_seed, int) or not -(2**63) <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit integer", field="master_seed")
        if self.dim_h * self.dim_k > MAX_TOTAL_DIM:
            raise ConfigError(f"dim_h*dim_k must not exceed {MAX_TOTAL_DIM}", field="dim_h")
        if self.output_format not in FORMATS:
            raise ConfigError(f"output_format must be json or csv, got {self.output_format!r}", field="output_format")
        return self


@dataclass(frozen=True)
class TrialRecord:
    index: int
    seed: int
    certificate: GainCertificate
    checks: dict = field(default_factory=dict)
    verdict: str = None

    @property
    def passed(self):
        if self.verdict is not None:
            return self.verdict == "SUPPORTED"
        return self.certificate.passed and all(self.checks.values())


@dataclass(frozen=True)
class CampaignReport:
    config: CampaignConfig
    trials: tuple
    wall_clock: float = 0.0
    units: str = "nats"

    @property
    def theorem_backed(self):
        return self.config.theorem in THEOREM_BACKED

    @property
    def pass_count(self):
        return sum(1 for t in self.trials if t.passed)

    @property
    def fail_count(self):
        return len(self.trials) - self.pass_count

    @property
    def has_theorem_failures(self):
        return self.theorem_backed and self.fail_count > 0

    def summary(self):
        if not self.trials:
            return {"pass": 0, "fail": 0, "min_margin": None, "argmin_seed": None}
        worst = min(self.trials, key=lambda t: (t.certificate.margin, t.index))
        return {
            "pass": self.pass_count,
            "fail": self.fail_count,
            "min_margin": worst.certificate.margin,
            "argmin_seed": worst.seed,
        }


def _dims(cfg, seed, minimum_h=1):
    if not cfg.vary_dims:
        return cfg.dim_h, cfg.dim_k
    rng = make_rng(mix_seed(seed, 1000))
    low = min(minimum_h, cfg.dim_h)
    return int(rng.integers(low, cfg.dim_h + 1)), int(rng.integers(1, cfg.dim_k + 1))


def _stamp(cert, seed, **dims):
    return dataclasses.replace(cert, seed=seed, dims=dims)


def _trial_eq3(cfg, seed):
    _, dim_k = _dims(cfg, seed)
    chan = random_unital_channel(dim_k, cfg.num_kraus, mix_seed(seed, 1))
    rho = random_density(dim_k, mix_seed(seed, 2))
    cert = holevo_gain_bound(chan, rho, tol=cfg.tolerance)
    checks = {"bound_is_zero": abs(cert.rhs) <= BOUND_ZERO_TOL}
    return _stamp(cert, seed, dim_k=dim_k, kraus=cfg.num_kraus), checks, None


def _trial_prop1(cfg, seed):
    dim_h, dim_k = _dims(cfg, seed)
    spec = random_correlated_spec(dim_h, dim_k, mix_seed(seed, 1))
    omega = random_channel(dim_k, cfg.num_kraus, mix_seed(seed, 2))
    rho = correlated_state(spec)
    p = support_projection(spec.vectors, dim_h)
    cert = projection_gain_bound(tensor(identity_channel(dim_h), omega), rho, p, tol=cfg.tolerance)
    checks = {
        "projection_idempotent": max_abs(p @ p - p) <= EXACT_TOL and max_abs(p - dagger(p)) <= EXACT_TOL,
        "projection_fixes_state": max(max_abs(p @ rho.matrix - rho.matrix), max_abs(rho.matrix @ p - rho.matrix)) <= EXACT_TOL,
    }
    return _stamp(cert, seed, dim_h=dim_h, dim_k=dim_k, kraus=cfg.num_kraus), checks, None


def _trial_thm1(cfg, seed):
    dim_h, dim_k = _dims(cfg, seed)
    spec = random_correlated_spec(dim_h, dim_k, mix_seed(seed, 1))
    omega = random_channel(dim_k, cfg.num_kraus, mix_seed(seed, 2))
    cert = check_theorem1(spec, omega, tol=cfg.tolerance)
    return _stamp(cert, seed, **cert.dims), {}, None


def _trial_cor1(cfg, seed):
    dim_h, dim_k = _dims(cfg, seed)
    spec = random_correlated_spec(dim_h, dim_k, mix_seed(seed, 1))
    omega = random_channel(dim_k, cfg.num_kraus, mix_seed(seed, 2))
    result = check_corollary1(
        spec, omega, m=cfg.roof_m, restarts=cfg.roof_restarts, seed=mix_seed(seed, 3), tol=cfg.tolerance
    )
    checks = {"roof_dominated": result.roof_dominated}
    return _stamp(result.certificate, seed, **result.certificate.dims), checks, None


def _trial_cor2(cfg, seed):
    dim_h, dim_k = _dims(cfg, seed)
    corr = random_correlation(dim_h, mix_seed(seed, 1))
    nu = random_unit_vector(make_rng(mix_seed(seed, 2)), dim_h)
    hs = random_unit_vectors(dim_h, dim_k, mix_seed(seed, 3))
    omega = random_channel(dim_k, cfg.num_kraus, mix_seed(seed, 4))
    cert = check_corollary2(corr, nu, hs, omega, tol=cfg.tolerance)
    direct = dephase_then_correlate(corr, nu, hs)
    via_channel = apply(tensor(dephasing_channel(corr), identity_channel(dim_k)), pure_correlated_state(nu, hs))
    checks = {"construction_paths_agree": max_abs(direct.matrix - via_channel.matrix) <= EXACT_TOL}
    return _stamp(cert, seed, **cert.dims), checks, None


def _trial_thm4(cfg, seed):
    n, _ = _dims(cfg, seed, minimum_h=2)
    pi = random_distribution(n, mix_seed(seed, 1))
    distance = choi_distance(phase_damping_channel(pi), shift_representation(pi))
    recovered = classify_phase_damping(dft_sequence(pi))
    checks = {
        "bochner_round_trip": isinstance(recovered, ProbabilityDistribution)
        and max_abs(recovered.weights - pi.weights) <= EXACT_TOL,
    }
    cert = GainCertificate(theorem="thm4", lhs=0.0, rhs=distance, tolerance=CHOI_TOL)
    return _stamp(cert, seed, n=n), checks, None


def _trial_thm5(cfg, seed):
    dim, _ = _dims(cfg, seed, minimum_h=2)
    rng = make_rng(mix_seed(seed, 1))
    mu = random_circle_measure(int(rng.integers(1, 6)), mix_seed(seed, 2))
    distance = choi_distance(toeplitz_dephasing(mu, dim), diagonal_unitary_mixture(mu, dim))
    checks = {"kernel_psd": psd_check(toeplitz_kernel(mu, dim), EXACT_TOL)}
    cert = GainCertificate(
        theorem="thm5", lhs=0.0, rhs=distance, tolerance=CHOI_TOL, details={"atoms": len(mu.atoms)}
    )
    return _stamp(cert, seed, dim=dim), checks, None


def _trial_conjecture(cfg, seed):
    dim_h, dim_k = _dims(cfg, seed)
    rho = random_density(dim_h * dim_k, mix_seed(seed, 1))
    omega = random_channel(dim_k, cfg.num_kraus, mix_seed(seed, 2))
    outcome = probe_conjecture(
        rho, dim_h, dim_k, omega, m=cfg.roof_m, restarts=cfg.roof_restarts, seed=mix_seed(seed, 3), tol=cfg.tolerance
    )
    cert = GainCertificate(
        theorem="conjecture",
        lhs=outcome.gain,
        rhs=outcome.roof.value,
        tolerance=cfg.tolerance,
        details={"verdict": outcome.verdict, "roof_converged": outcome.roof.converged, "label": "probe"},
    )
    return _stamp(cert, seed, dim_h=dim_h, dim_k=dim_k, kraus=cfg.num_kraus), {}, outcome.verdict


def _trial_monotonicity(cfg, seed):
    _, dim_k = _dims(cfg, seed)
    rho = random_density(dim_k, mix_seed(seed, 1))
    sigma = random_density(dim_k, mix_seed(seed, 2))
    omega = random_channel(dim_k, cfg.num_kraus, mix_seed(seed, 3))
    cert = GainCertificate(
        theorem="monotonicity",
        lhs=relative_entropy(rho, sigma),
        rhs=relative_entropy(apply(omega, rho), apply(omega, sigma)),
        tolerance=cfg.tolerance,
    )
    return _stamp(cert, seed, dim_k=dim_k, kraus=cfg.num_kraus), {}, None


TRIALS = {
    "eq3": _trial_eq3,
    "prop1": _trial_prop1,
    "thm1": _trial_thm1,
    "cor1": _trial_cor1,
    "cor2": _trial_cor2,
    "thm4": _trial_thm4,
    "thm5": _trial_thm5,
    "conjecture": _trial_conjecture,
    "monotonicity": _trial_monotonicity,
}


def run_trial(cfg, index):
    """Run one trial; reproducible standalone from (cfg, index) or from its recorded seed"""
    seed = mix_seed(cfg.master_seed, index)
    return run_trial_seed(cfg, seed, index)


def run_trial_seed(cfg, seed, index=0):
    cert, checks, verdict = TRIALS[cfg.theorem](cfg, seed)
    record = TrialRecord(index=index, seed=seed, certificate=cert, checks=checks, verdict=verdict)
    logger.debug(f"{cfg.theorem} trial {index}: margin {cert.margin:.3e} pass={record.passed}")
    return record


def run_campaign(cfg):
    cfg.validate()
    logger.info(f"Starting {cfg.theorem} campaign: {cfg.trials} trials, dims {cfg.dim_h}x{cfg.dim_k}, seed {cfg.master_seed}")
    started = time.perf_counter()

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(lambda i: run_trial(cfg, i), range(cfg.trials)))
    else:
        records = [run_trial(cfg, i) for i in range(cfg.trials)]

    report = CampaignReport(config=cfg, trials=tuple(records), wall_clock=time.perf_counter() - started)
    logger.info(
        f"Finished {cfg.theorem} campaign: {report.pass_count}/{cfg.trials} passed in {report.wall_clock:.2f}s"
    )
    if report.has_theorem_failures:
        failing = [t.seed for t in report.trials if not t.passed]
        logger.warning(f"{cfg.theorem}: {len(failing)} theorem-backed trials failed, seeds {failing[:10]}")
    return report


def convert_units(report, units):
    """Rescale entropic lhs/rhs/tolerance between nats and bits"""
    if units == report.units:
        return report
    if {units, report.units} != {"nats", "bits"}:
        raise ConfigError(f"unknown units {units!r}", field="units")
    if report.config.theorem in CHOI_THEOREMS:
        return dataclasses.replace(report, units=units)
    factor = 1 / math.log(2) if units == "bits" else math.log(2)
    trials = tuple(
        dataclasses.replace(
            t,
            certificate=dataclasses.replace(
                t.certificate,
                lhs=t.certificate.lhs * factor,
                rhs=t.certificate.rhs * factor,
                tolerance=t.certificate.tolerance * factor,
            ),
        )
        for t in report.trials
    )
    return dataclasses.replace(report, trials=trials, units=units)


def trial_to_dict(trial):
    return {
        "trial": trial.index,
        "seed": trial.seed,
        "certificate": certificate_to_dict(trial.certificate),
        "checks": {k: bool(v) for k, v in trial.checks.items()},
        "verdict": trial.verdict,
        "pass": trial.passed,
    }


def report_to_dict(report):
    return {
        "config": dataclasses.asdict(report.config),
        "units": report.units,
        "theorem_backed": report.theorem_backed,
        "interpretation": INTERPRETATION,
        "summary": report.summary(),
        "trials": [trial_to_dict(t) for t in report.trials],
        "wall_clock": report.wall_clock,
    }


def _float(value):
    return float("nan") if value is None else float(value)


def report_from_dict(obj):
    try:
        cfg = CampaignConfig(**obj["config"])
        trials = tuple(
            TrialRecord(
                index=t["trial"],
                seed=t["seed"],
                certificate=GainCertificate(
                    theorem=t["certificate"]["theorem"],
                    lhs=_float(t["certificate"]["lhs"]),
                    rhs=_float(t["certificate"]["rhs"]),
                    tolerance=t["certificate"]["tol"],
                    seed=t["certificate"]["seed"],
                    dims=t["certificate"]["dims"],
                    details=t["certificate"]["details"],
                ),
                checks=t["checks"],
                verdict=t["verdict"],
            )
            for t in obj["trials"]
        )
        return CampaignReport(config=cfg, trials=trials, wall_clock=obj["wall_clock"], units=obj["units"])
    except (KeyError, TypeError) as e:
        raise InputError(f"not a campaign report: {e}") from e


def read_report(path):
    return report_from_dict(load_json(path))


def emit_report(report, fmt, path):
    if fmt == "json":
        dump_json(report_to_dict(report), path)
    elif fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for t in report.trials:
                c = t.certificate
                writer.writerow([t.index, t.seed, repr(float(c.lhs)), repr(float(c.rhs)), repr(float(c.margin)), t.passed])
    else:
        raise ConfigError(f"unknown report format {fmt!r}", field="output_format")
    logger.info(f"Report written to {path} ({fmt})")
    return path


def config_from_dict(obj):
    if not isinstance(obj, dict):
        raise ConfigError("campaign config must be a JSON object", field="config")
    known = {f.name for f in dataclasses.fields(CampaignConfig)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(unknown)}", field=unknown[0])
    if "theorem" not in obj:
        raise ConfigError("theorem is required", field="theorem")
    return CampaignConfig(**obj).validate()


def demo_showcases(seed=0, tol=DEFAULT_TOL):
    """Equality cases: each certificate should have |margin| within tolerance"""
    dim_h, dim_k = 3, 2
    spec = random_correlated_spec(dim_h, dim_k, mix_seed(seed, 1))
    omega = random_channel(dim_k, 2, mix_seed(seed, 2))
    classical = CorrelatedStateSpec(coeff=np.diag(spec.weights), vectors=spec.vectors)
    pi = random_distribution(4, mix_seed(seed, 3))
    mu = random_circle_measure(3, mix_seed(seed, 4))
    d = 3

    showcases = [
        ("theorem 1, identity channel", check_theorem1(spec, identity_channel(dim_k), tol=tol)),
        ("theorem 1, diagonal coefficients", check_theorem1(classical, omega, tol=tol)),
        (
            "phase damping equals shift mixture",
            GainCertificate(
                theorem="thm4",
                lhs=0.0,
                rhs=choi_distance(phase_damping_channel(pi), shift_representation(pi)),
                tolerance=CHOI_TOL,
            ),
        ),
        (
            "toeplitz dephasing equals diagonal unitary mixture",
            GainCertificate(
                theorem="thm5",
                lhs=0.0,
                rhs=choi_distance(toeplitz_dephasing(mu, 4), diagonal_unitary_mixture(mu, 4)),
                tolerance=CHOI_TOL,
            ),
        ),
        (
            "roof of the fully depolarizing channel is log d",
            GainCertificate(
                theorem="roof",
                lhs=math.log(d),
                rhs=roof_upper_bound(random_density(d, mix_seed(seed, 5)), depolarizing_channel(d, 1.0)).value,
                tolerance=1e-9,
            ),
        ),
    ]
    return [
        {"name": name, "certificate": cert, "equality": abs(cert.margin) <= cert.tolerance}
        for name, cert in showcases
    ]
