"""qdeph command line: verification campaigns, phase-damping classification, channel building and roof estimates"""

import json
import logging
import os
import sys
from functools import wraps

import click
from dotenv import load_dotenv

from campaigns import THEOREMS, CampaignConfig, convert_units, demo_showcases, emit_report, report_to_dict, run_campaign
from channels import classify_phase_damping, phase_damping_channel, toeplitz_dephasing
from codec import (
    certificate_to_dict,
    channel_from_dict,
    channel_to_dict,
    distribution_from_dict,
    distribution_to_dict,
    dump_json,
    load_json,
    measure_from_dict,
    measure_to_dict,
    roof_to_dict,
    sequence_from_json,
    state_from_dict,
    verdict_to_dict,
    witness_from_json,
)
from errors import QDephError
from roof import roof_upper_bound

load_dotenv()

logging.basicConfig(
    level=os.getenv("QDEPH_LOG_LEVEL", "INFO"),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


class InputFailure(click.ClickException):
    """Malformed input or configuration; exits like a usage error"""
    exit_code = 2


def reports_errors(f):
    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except QDephError as e:
            field = f" [{e.field}]" if getattr(e, "field", None) else ""
            raise InputFailure(f"{type(e).__name__}{field}: {e}") from e
    return wrapper


def _print_json(obj):
    click.echo(json.dumps(obj, indent=2))


@click.group()
def cli():
    """Dephasing channels and entropy-gain bounds"""


@cli.command()
@click.option("--theorem", required=True, type=click.Choice(THEOREMS))
@click.option("--trials", default=1, show_default=True, type=int)
@click.option("--dim-h", default=2, show_default=True, type=int)
@click.option("--dim-k", default=2, show_default=True, type=int)
@click.option("--kraus", default=2, show_default=True, type=int, help="Kraus operators of the random channel")
@click.option("--tol", default=None, type=float, help="Inequality tolerance (default QDEPH_INEQ_TOL)")
@click.option("--seed", default=0, show_default=True, type=int, help="Master seed")
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Report file; summary only when omitted")
@click.option("--format", "output_format", default="json", show_default=True, type=click.Choice(["json", "csv"]))
@click.option("--ensemble-size", default=None, type=int, help="Roof ensemble size m (default rank squared)")
@click.option("--restarts", default=2, show_default=True, type=int, help="Roof search restarts")
@click.option("--workers", default=None, type=int, help="Worker threads (default QDEPH_WORKERS)")
@click.option("--vary-dims", is_flag=True, help="Draw dims per trial from 1..dim-h and 1..dim-k")
@click.option("--bits", is_flag=True, help="Report entropies in bits instead of nats")
@reports_errors
def verify(theorem, trials, dim_h, dim_k, kraus, tol, seed, out, output_format, ensemble_size, restarts, workers, vary_dims, bits):
    """Run a randomized verification campaign"""
    overrides = {k: v for k, v in {"tolerance": tol, "workers": workers}.items() if v is not None}
    cfg = CampaignConfig(
        theorem=theorem,
        trials=trials,
        dim_h=dim_h,
        dim_k=dim_k,
        num_kraus=kraus,
        master_seed=seed,
        roof_m=ensemble_size,
        roof_restarts=restarts,
        output=out,
        output_format=output_format,
        vary_dims=vary_dims,
        **overrides,
    ).validate()

    report = run_campaign(cfg)
    if bits:
        report = convert_units(report, "bits")
    if out:
        try:
            emit_report(report, output_format, out)
        except OSError as e:
            raise InputFailure(f"cannot write {out}: {e.strerror or e}") from e

    body = report_to_dict(report)
    _print_json({k: body[k] for k in ("summary", "theorem_backed", "units", "interpretation", "wall_clock")})
    if report.has_theorem_failures:
        sys.exit(1)


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@reports_errors
def classify(input_path):
    """Decide whether a λ sequence is a phase-damping channel"""
    lam = sequence_from_json(load_json(input_path))
    _print_json(verdict_to_dict(classify_phase_damping(lam)))


@cli.command("build-channel")
@click.option("--distribution", default=None, type=click.Path(dir_okay=False), help="distribution on Z_N (phase damping)")
@click.option("--measure", default=None, type=click.Path(dir_okay=False), help="atomic circle measure (Toeplitz truncation)")
@click.option("--dim", default=None, type=int, help="truncation dimension, required with --measure")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@reports_errors
def build_channel(distribution, measure, dim, out):
    """Write the Kraus form of a phase-damping or truncated circle-measure dephasing channel"""
    if (distribution is None) == (measure is None):
        raise click.UsageError("give exactly one of --distribution and --measure")
    if distribution is not None:
        pi = distribution_from_dict(load_json(distribution))
        chan = phase_damping_channel(pi)
        source = {"distribution": distribution_to_dict(pi)}
    else:
        if dim is None or dim < 1:
            raise click.BadParameter("a positive --dim is required with --measure", param_hint="--dim")
        mu = measure_from_dict(load_json(measure))
        chan = toeplitz_dephasing(mu, dim)
        source = {"measure": measure_to_dict(mu)}

    try:
        dump_json(channel_to_dict(chan), out)
    except OSError as e:
        raise InputFailure(f"cannot write {out}: {e.strerror or e}") from e
    _print_json({"dim": chan.dim_in, "kraus": chan.num_kraus, "out": out, **source})



@cli.command()
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False))
@click.option("--channel", "channel_path", required=True, type=click.Path(dir_okay=False))
@click.option("--ensemble-size", default=None, type=int)
@click.option("--restarts", default=4, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--witness", "witness_paths", multiple=True, type=click.Path(dir_okay=False), help="ensemble or saved roof estimate of the same state")
@reports_errors
def roof(state_path, channel_path, ensemble_size, restarts, seed, witness_paths):
    """Upper-bound the minimal output entropy over ensembles of a state"""
    if restarts < 1:
        raise click.BadParameter("must be at least 1", param_hint="--restarts")
    sigma = state_from_dict(load_json(state_path))
    omega = channel_from_dict(load_json(channel_path))
    witnesses = tuple(witness_from_json(load_json(p)) for p in witness_paths)
    estimate = roof_upper_bound(sigma, omega, m=ensemble_size, restarts=restarts, seed=seed, witnesses=witnesses)
    _print_json(roof_to_dict(estimate))


@cli.command()
@click.option("--seed", default=0, show_default=True, type=int)
@reports_errors
def demo(seed):
    """Show the equality cases of the entropy and representation theorems"""
    showcases = demo_showcases(seed=seed)
    for item in showcases:
        cert = item["certificate"]
        mark = "ok " if item["equality"] else "BAD"
        click.echo(f"[{mark}] {item['name']}: lhs={cert.lhs:.12g} rhs={cert.rhs:.12g} margin={cert.margin:.3e}")
    _print_json([{"name": i["name"], **certificate_to_dict(i["certificate"])} for i in showcases])
    if not all(item["equality"] for item in showcases):
        sys.exit(1)


@cli.command()
@click.option("--host", default="0.0.0.0", show_default=True)
@click.option("--port", default=lambda: int(os.getenv("PORT", "5000")), type=int)
@click.option("--debug", is_flag=True)
def serve(host, port, debug):
    """Run the HTTP API"""
    from app import app

    logger.info(f"Serving qdeph API on {host}:{port}")
    app.run(debug=debug, host=host, port=port)


if __name__ == "__main__":
    cli()
