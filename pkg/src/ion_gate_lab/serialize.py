"""JSON documents for schedules, matrices and reports (schema ``ion-gate-lab/1``)."""

from __future__ import annotations

import json

import numpy as np

from .coupling import CouplingContext
from .dynamics import JointSpace, Pulse
from .sequence import Schedule

SCHEMA = "ion-gate-lab/1"


class SchemaError(ValueError):
    pass


def matrix_to_pairs(matrix) -> list[list[list[float]]]:
    """Row-major list of ``[re, im]`` pairs."""
    m = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_pairs(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise SchemaError("matrix must be a list of rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def pulse_to_dict(p: Pulse) -> dict:
    return {
        "ion": p.target_ion,
        "sideband_order": p.sideband_order,
        "phase_rad": p.phase,
        "pulse_area_rad": p.pulse_area,
        "eta": p.ctx.eta,
        "g": p.ctx.g,
    }


def pulse_from_dict(d: dict) -> Pulse:
    try:
        return Pulse(
            target_ion=int(d["ion"]),
            sideband_order=int(d["sideband_order"]),
            phase=float(d["phase_rad"]),
            pulse_area=float(d["pulse_area_rad"]),
            ctx=CouplingContext(eta=float(d["eta"]), g=float(d.get("g", 1.0))),
        )
    except KeyError as exc:
        raise SchemaError(f"pulse record is missing {exc.args[0]!r}") from None


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "schedule",
        "space": {"n_ions": schedule.space.n_ions, "fock_cutoff": schedule.space.fock_cutoff},
        "pulses": [pulse_to_dict(p) for p in schedule.pulses],
    }


def schedule_from_dict(doc: dict) -> Schedule:
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA!r}")
    try:
        space = JointSpace(int(doc["space"]["n_ions"]), int(doc["space"]["fock_cutoff"]))
        pulses = [pulse_from_dict(p) for p in doc["pulses"]]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed schedule document: {exc}") from None
    return Schedule(tuple(pulses), space)


def dumps(doc: dict) -> str:
    """Deterministic JSON text, LF terminated."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def save_schedule(schedule: Schedule, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(schedule_to_dict(schedule)))


def load_schedule(path) -> Schedule:
    with open(path, encoding="utf-8") as fh:
        return schedule_from_dict(json.load(fh))
