import logging
import os

from dotenv import load_dotenv
from flask import Flask, jsonify, request
from flask_cors import CORS

from campaigns import THEOREM_BACKED, THEOREMS, config_from_dict, report_to_dict, run_campaign
from channels import classify_phase_damping, phase_damping_channel, toeplitz_dephasing
from codec import (
    channel_from_dict,
    channel_to_dict,
    distribution_from_dict,
    distribution_to_dict,
    measure_from_dict,
    measure_to_dict,
    roof_to_dict,
    sequence_from_json,
    state_from_dict,
    state_to_dict,
    verdict_to_dict,
    witness_from_json,
)
from errors import InputError, QDephError
from roof import roof_upper_bound
from service_limits import RATE_LIMIT, setup_rate_limiting_and_caching

load_dotenv()

logging.basicConfig(level=os.getenv("QDEPH_LOG_LEVEL", "INFO"))
logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)

limiter, cache, report_cache = setup_rate_limiting_and_caching(app)


def _payload():
    data = request.get_json(silent=True)
    if data is None:
        raise InputError("request body must be JSON")
    return data


def _failure(e, status):
    body = {"success": False, "error": str(e)}
    if getattr(e, "field", None):
        body["field"] = e.field
    return jsonify(body), status


@app.route("/api/health")
def api_health():
    return jsonify({"success": True, "status": "ok", "cache": report_cache.get_stats()})


@app.route("/api/theorems")
def api_theorems():
    return jsonify({
        "success": True,
        "theorems": [{"id": t, "theorem_backed": t in THEOREM_BACKED} for t in THEOREMS],
    })


@app.route("/api/classify", methods=["POST"])
def api_classify():
    """Phase-damping verdict for a λ sequence"""
    try:
        verdict = verdict_to_dict(classify_phase_damping(sequence_from_json(_payload())))
        return jsonify({"success": True, **verdict})
    except QDephError as e:
        return _failure(e, 400)
    except Exception as e:
        logger.exception(f"Error in api_classify: {e}")
        return _failure(e, 500)


@app.route("/api/build-channel", methods=["POST"])
def api_build_channel():
    """{"weights": [...]} for phase damping, or {"atoms": [...], "dim": n} for a Toeplitz truncation"""
    try:
        data = _payload()
        if isinstance(data, dict) and "atoms" in data:
            dim = data.get("dim")
            if not isinstance(dim, int) or dim < 1:
                raise InputError("dim must be a positive integer")
            mu = measure_from_dict(data)
            chan = toeplitz_dephasing(mu, dim)
            source = {"measure": measure_to_dict(mu)}
        else:
            pi = distribution_from_dict(data)
            chan = phase_damping_channel(pi)
            source = {"distribution": distribution_to_dict(pi)}
        return jsonify({"success": True, "channel": channel_to_dict(chan), **source})
    except QDephError as e:
        return _failure(e, 400)
    except Exception as e:
        logger.exception(f"Error in api_build_channel: {e}")
        return _failure(e, 500)


@app.route("/api/verify", methods=["POST"])
@limiter.limit(RATE_LIMIT)
def api_verify():
    """Run a campaign; identical configs are served from the report cache"""
    try:
        data = _payload()
        if isinstance(data, dict) and "output" in data:
            raise InputError("reports are returned in the response; output paths are not accepted")
        cfg = config_from_dict(data)
        cache_key = report_cache.get_cache_key("verify", data)
        report = report_cache.get(cache_key)
        cached = report is not None
        if not cached:
            report = report_to_dict(run_campaign(cfg))
            report_cache.set(cache_key, report)
        return jsonify({"success": True, "cached": cached, "report": report})
    except QDephError as e:
        return _failure(e, 400)
    except Exception as e:
        logger.exception(f"Error in api_verify: {e}")
        return _failure(e, 500)


@app.route("/api/roof", methods=["POST"])
@limiter.limit(RATE_LIMIT)
def api_roof():
    try:
        data = _payload()
        if not isinstance(data, dict) or "state" not in data or "channel" not in data:
            raise InputError("body needs 'state' and 'channel'")
        restarts = data.get("restarts", 4)
        if not isinstance(restarts, int) or restarts < 1:
            raise InputError("restarts must be a positive integer")
        ensemble_size = data.get("ensemble_size")
        if ensemble_size is not None and (not isinstance(ensemble_size, int) or ensemble_size < 1):
            raise InputError("ensemble_size must be a positive integer")
        witnesses = data.get("witnesses", [])
        if not isinstance(witnesses, list):
            raise InputError("witnesses must be a list of ensembles")
        sigma = state_from_dict(data["state"])
        estimate = roof_upper_bound(
            sigma,
            channel_from_dict(data["channel"]),
            m=ensemble_size,
            restarts=restarts,
            seed=data.get("seed", 0),
            witnesses=tuple(witness_from_json(w) for w in witnesses),
        )
        return jsonify({"success": True, "state": state_to_dict(sigma), "roof": roof_to_dict(estimate)})
    except QDephError as e:
        return _failure(e, 400)
    except Exception as e:
        logger.exception(f"Error in api_roof: {e}")
        return _failure(e, 500)


if __name__ == "__main__":
    print("🚀 Starting qdeph API...")
    print("📊 POST /api/verify runs verification campaigns")
    print("🔎 POST /api/classify decides phase-damping sequences")
    app.run(debug=True, host="0.0.0.0", port=int(os.getenv("PORT", "5000")))
