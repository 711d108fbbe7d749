"""
JSON encodings shared by the CLI, the HTTP app and campaign reports.
Floats go through json's repr, which is the shortest round-trip decimal.
"""

import json
import math

import numpy as np

from channels import CircleMeasure, ProbabilityDistribution, make_channel
from errors import InputError, QDephError
from roof import Ensemble, RoofEstimate
from states import CorrelatedStateSpec, density_from_matrix


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _number(x):
    """Real float, or None for non-finite values (JSON has no inf/nan)"""
    x = float(x)
    return x if math.isfinite(x) else None


def _complex_entry(entry):
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry, 0)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        try:
            return complex(float(entry[0]), float(entry[1]))
        except (TypeError, ValueError):
            pass
    raise InputError(f"expected a number or a [re, im] pair, got {entry!r}")


def _require(obj, *keys):
    if not isinstance(obj, dict):
        raise InputError(f"expected a JSON object with keys {list(keys)}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise InputError(f"missing keys: {', '.join(missing)}")


def vector_to_list(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128).reshape(-1)]


def vector_from_list(data):
    if not isinstance(data, list) or not data:
        raise InputError("expected a non-empty list of [re, im] pairs")
    return np.array([_complex_entry(e) for e in data], dtype=np.complex128)


def matrix_to_dict(m):
    m = np.asarray(m, dtype=np.complex128)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": vector_to_list(m.reshape(-1))}


def matrix_from_dict(obj):
    _require(obj, "rows", "cols", "data")
    rows, cols = obj["rows"], obj["cols"]
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 1 or cols < 1:
        raise InputError("rows and cols must be positive integers")
    data = vector_from_list(obj["data"])
    if len(data) != rows * cols:
        raise InputError(f"matrix data has {len(data)} entries, expected {rows * cols}")
    return data.reshape(rows, cols)


def channel_to_dict(chan):
    return {
        "dim_in": chan.dim_in,
        "dim_out": chan.dim_out,
        "kraus": [matrix_to_dict(k) for k in chan.kraus_ops],
    }


def channel_from_dict(obj):
    _require(obj, "kraus")
    if not isinstance(obj["kraus"], list):
        raise InputError("kraus must be a list of matrices")
    chan = make_channel([matrix_from_dict(k) for k in obj["kraus"]])
    for key in ("dim_in", "dim_out"):
        if key in obj and obj[key] != getattr(chan, key):
            raise InputError(f"{key}={obj[key]} disagrees with the Kraus operators ({getattr(chan, key)})")
    return chan


def distribution_to_dict(pi):
    return {"weights": [float(w) for w in pi.weights]}


def distribution_from_dict(obj):
    _require(obj, "weights")
    try:
        return ProbabilityDistribution([float(w) for w in obj["weights"]])
    except (TypeError, ValueError) as e:
        raise InputError(f"weights must be numbers: {e}") from e


def measure_to_dict(mu):
    return {"atoms": [[float(w), float(t)] for w, t in mu.atoms]}


def measure_from_dict(obj):
    _require(obj, "atoms")
    try:
        return CircleMeasure(tuple((float(w), float(t)) for w, t in obj["atoms"]))
    except (TypeError, ValueError) as e:
        raise InputError(f"atoms must be [weight, angle] pairs: {e}") from e


def state_to_dict(rho):
    out = matrix_to_dict(rho.matrix)
    if rho.subsystems:
        out["dim_h"], out["dim_k"] = rho.subsystems
    return out


def state_from_dict(obj):
    _require(obj, "rows", "cols", "data")
    subsystems = None
    if "dim_h" in obj or "dim_k" in obj:
        _require(obj, "dim_h", "dim_k")
        subsystems = (obj["dim_h"], obj["dim_k"])
    return density_from_matrix(matrix_from_dict(obj), subsystems=subsystems)


def spec_to_dict(spec):
    return {"coeff": matrix_to_dict(spec.coeff), "vectors": [vector_to_list(h) for h in spec.vectors]}


def spec_from_dict(obj):
    _require(obj, "coeff", "vectors")
    return CorrelatedStateSpec(
        coeff=matrix_from_dict(obj["coeff"]),
        vectors=tuple(vector_from_list(h) for h in obj["vectors"]),
    )


def sequence_from_json(obj):
    """λ sequence: a list of numbers / [re, im] pairs, or {"lambda": [...]}"""
    if isinstance(obj, dict):
        _require(obj, "lambda")
        obj = obj["lambda"]
    return vector_from_list(obj)


def _plain(value):
    """Make certificate details JSON-safe"""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _number(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def certificate_to_dict(cert):
    return {
        "theorem": cert.theorem,
        "lhs": _number(cert.lhs),
        "rhs": _number(cert.rhs),
        "margin": _number(cert.margin),
        "tol": cert.tolerance,
        "pass": cert.passed,
        "seed": cert.seed,
        "dims": _plain(cert.dims),
        "details": _plain(cert.details),
    }


def ensemble_to_dict(ens):
    return {"weights": [float(w) for w in ens.weights], "members": [vector_to_list(v) for v in ens.members]}


def ensemble_from_dict(obj):
    _require(obj, "weights", "members")
    try:
        return Ensemble(weights=obj["weights"], members=tuple(vector_from_list(v) for v in obj["members"]))
    except QDephError as e:
        raise InputError(f"invalid ensemble: {e}") from e


def roof_to_dict(estimate):
    return {
        "value": estimate.value,
        "ensemble": ensemble_to_dict(estimate.ensemble),
        "restarts": estimate.restarts,
        "converged": estimate.converged,
    }


def roof_from_dict(obj):
    _require(obj, "value", "ensemble", "restarts", "converged")
    return RoofEstimate(
        value=float(obj["value"]),
        ensemble=ensemble_from_dict(obj["ensemble"]),
        restarts=int(obj["restarts"]),
        converged=bool(obj["converged"]),
    )


def witness_from_json(obj):
    """Ensemble JSON, or a saved RoofEstimate whose ensemble is reused"""
    if isinstance(obj, dict) and "ensemble" in obj:
        return roof_from_dict(obj).ensemble
    return ensemble_from_dict(obj)


def verdict_to_dict(result):
    if isinstance(result, ProbabilityDistribution):
        return {"phase_damping": True, "pi": [float(w) for w in result.weights]}
    return {
        "phase_damping": False,
        "violation": {"index": result.index, "value": result.value, "reason": result.reason},
    }
