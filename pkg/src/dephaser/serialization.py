"""JSON codecs for matrices, channels, superchannels, realizations, and
solver artifacts.

Matrix schema: {"rows": r, "cols": c, "data": [[re, im], ...]} with the data
list in row-major order. Non-finite report values are serialized as the
strings "inf" / "-inf" since JSON has no infinity literal.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .channels import Channel, DephasingChannelC, dephasing_c, from_jam, from_kraus
from .superchannels import (
    DephasingSuperchannel,
    SuperRealization,
    superchannel,
)


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("matrix must be 2-dimensional")
    data = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": data}


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ValueError("matrix JSON must be an object")
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"matrix JSON missing field: {exc}") from exc
    if rows <= 0 or cols <= 0 or len(data) != rows * cols:
        raise ValueError(f"matrix JSON has {len(data)} entries, expected {rows}x{cols}")
    flat = np.empty(rows * cols, dtype=complex)
    for pos, entry in enumerate(data):
        if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
            raise ValueError(f"matrix entry {pos} is not a [re, im] pair")
        flat[pos] = complex(float(entry[0]), float(entry[1]))
    return flat.reshape(rows, cols)


def encode_float(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        raise ValueError("refusing to serialize NaN")
    return x


def channel_to_json(ch: Channel) -> dict:
    return {"dim": int(ch.dim), "jamiolkowski": matrix_to_json(ch.jam)}


def channel_from_json(obj, tol: float = 1e-9) -> Channel:
    if not isinstance(obj, dict) or "dim" not in obj:
        raise ValueError("channel JSON must be an object with a dim field")
    d = int(obj["dim"])
    if d < 1:
        raise ValueError(f"channel dim must be positive, got {d}")
    if "kraus" in obj:
        ks = [matrix_from_json(k) for k in obj["kraus"]]
        if any(k.shape != (d, d) for k in ks):
            raise ValueError("kraus operator shape does not match dim")
        return from_kraus(ks, tol)
    if "jamiolkowski" in obj:
        jam = matrix_from_json(obj["jamiolkowski"])
        if jam.shape != (d * d, d * d):
            raise ValueError(f"jamiolkowski shape {jam.shape} does not match dim {d}")
        return from_jam(jam, tol)
    raise ValueError("channel JSON needs a jamiolkowski or kraus field")


def superchannel_to_json(sc: DephasingSuperchannel) -> dict:
    return {"dim": int(sc.dim), "correlation": matrix_to_json(sc.c)}


def superchannel_from_json(obj, tol: float = 1e-9) -> DephasingSuperchannel:
    if not isinstance(obj, dict) or "dim" not in obj or "correlation" not in obj:
        raise ValueError("superchannel JSON needs dim and correlation fields")
    d = int(obj["dim"])
    c = matrix_from_json(obj["correlation"])
    if c.shape != (d * d, d * d):
        raise ValueError(f"correlation shape {c.shape} does not match dim {d}")
    return superchannel(c, d, tol)


def dephasing_to_json(dc: DephasingChannelC) -> dict:
    return {"dim": int(dc.dim), "correlation": matrix_to_json(dc.c)}


def dephasing_from_json(obj, tol: float = 1e-9) -> DephasingChannelC:
    if not isinstance(obj, dict) or "dim" not in obj or "correlation" not in obj:
        raise ValueError("dephasing-channel JSON needs dim and correlation fields")
    d = int(obj["dim"])
    c = matrix_from_json(obj["correlation"])
    if c.shape != (d, d):
        raise ValueError(f"correlation shape {c.shape} does not match dim {d}")
    return dephasing_c(c, tol)


def realization_to_json(real: SuperRealization) -> dict:
    return {
        "us": [matrix_to_json(u) for u in real.us],
        "vs": [matrix_to_json(v) for v in real.vs],
    }


def realization_from_json(obj) -> SuperRealization:
    if not isinstance(obj, dict) or "us" not in obj or "vs" not in obj:
        raise ValueError("realization JSON needs us and vs fields")
    us = tuple(matrix_from_json(u) for u in obj["us"])
    vs = tuple(matrix_from_json(v) for v in obj["vs"])
    if len(us) != len(vs) or not us:
        raise ValueError("realization needs equally many us and vs")
    return SuperRealization(us=us, vs=vs)


def certificate_to_json(cert) -> dict:
    out = {
        "value": encode_float(cert.value),
        "primal_dual_gap": encode_float(cert.primal_dual_gap),
        "classical_target": matrix_to_json(np.asarray(cert.classical_target, dtype=complex)),
        "noise_channel": None,
    }
    if cert.noise_channel is not None:
        out["noise_channel"] = channel_to_json(cert.noise_channel)
    return out


def instance_to_json(inst) -> dict:
    return {
        "gate": channel_to_json(inst.gate),
        "superchannels": [superchannel_to_json(sc) for sc in inst.superchannels],
        "input_state": matrix_to_json(inst.input_state),
        "povm": [matrix_to_json(b) for b in inst.povm],
        "p_succ": encode_float(inst.p_succ),
        "iteration_log": list(inst.iteration_log),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
