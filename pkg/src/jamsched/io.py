"""JSON forms of instances, solutions and results.

Instance::

    {"arrivals": [{"id": "a0", "deadline_ms": 150, "size_bits": 8000, "load_cycles": 2000000}],
     "queued":   [{"id": "q0", "deadline_ms": 180, "load_cycles": 5000000}],
     "rb_count": 3,
     "sjnr": [[3.16, 3.16, 3.16]],        # linear, one row per arrival
     "rb_bandwidth_hz": 100000, "cpu_hz": 1e9, "lambda": 0.5,
     "modulation_bits_per_symbol": 4, "ber_model": "awgn"}

``sjnr_db`` (a scalar, or a list with one value per RB) may replace ``sjnr``.

Solution::

    {"queue_position": {"q0": 1, "a0": 2}, "rb_owner": ["a0", null, null]}

Missing keys mean "nothing scheduled" / "no RB owned". Non-finite floats in
outputs (an unserved task's infinite completion time) are written as null.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

from .model import ProblemInstance, Solution, StructuralError, TaskKind, make_tasks
from .taskgen import generate_sjnr_matrix


class InputError(ValueError):
    """Malformed JSON input; the message names the offending field."""


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise InputError(f"{where}: missing field '{key}'")
    return d[key]


def instance_from_dict(d: Any) -> ProblemInstance:
    if not isinstance(d, dict):
        raise InputError("instance: top level must be an object")
    arrivals_raw = d.get("arrivals", [])
    queued_raw = d.get("queued", [])
    for name, rows in (("arrivals", arrivals_raw), ("queued", queued_raw)):
        if not isinstance(rows, list):
            raise InputError(f"instance.{name}: must be a list")
        for k, row in enumerate(rows):
            if not isinstance(row, dict):
                raise InputError(f"instance.{name}[{k}]: must be an object")
            for key in ("deadline_ms", "load_cycles") + (("size_bits",) if name == "arrivals" else ()):
                _need(row, key, f"instance.{name}[{k}]")
    try:
        arrivals = make_tasks(TaskKind.ARRIVAL, arrivals_raw, "a")
        queued = make_tasks(TaskKind.QUEUED, queued_raw, "q")
        rb_count = int(_need(d, "rb_count", "instance"))
        if "sjnr" in d:
            sjnr = d["sjnr"]
        elif "sjnr_db" in d:
            db = d["sjnr_db"]
            per_rb = [float(db)] * rb_count if isinstance(db, (int, float)) else [float(x) for x in db]
            sjnr = generate_sjnr_matrix(per_rb, len(arrivals))
        else:
            raise InputError("instance: missing field 'sjnr' (or 'sjnr_db')")
        return ProblemInstance(
            arrivals=arrivals,
            queued=queued,
            rb_count=rb_count,
            sjnr=sjnr,
            rb_bandwidth_hz=float(d.get("rb_bandwidth_hz", 1e5)),
            cpu_hz=float(d.get("cpu_hz", 1e9)),
            lam=float(d.get("lambda", 0.5)),
            modulation_bits_per_symbol=int(d.get("modulation_bits_per_symbol", 4)),
            ber_model=str(d.get("ber_model", "awgn")),
        )
    except InputError:
        raise
    except (StructuralError, TypeError, ValueError) as exc:
        raise InputError(f"instance: {exc}") from exc


def instance_to_dict(inst: ProblemInstance) -> dict:
    return {
        "arrivals": [
            {"id": t.id, "deadline_ms": t.deadline_ms, "size_bits": t.size_bits, "load_cycles": t.load_cycles}
            for t in inst.arrivals
        ],
        "queued": [{"id": t.id, "deadline_ms": t.deadline_ms, "load_cycles": t.load_cycles} for t in inst.queued],
        "rb_count": inst.rb_count,
        "sjnr": inst.sjnr.tolist(),
        "rb_bandwidth_hz": inst.rb_bandwidth_hz,
        "cpu_hz": inst.cpu_hz,
        "lambda": inst.lam,
        "modulation_bits_per_symbol": inst.modulation_bits_per_symbol,
        "ber_model": inst.ber_model,
    }


def solution_from_dict(d: Any, inst: ProblemInstance) -> Solution:
    if d is None:
        d = {}
    if not isinstance(d, dict):
        raise InputError("solution: top level must be an object")
    positions = d.get("queue_position", {})
    if not isinstance(positions, dict):
        raise InputError("solution.queue_position: must be an object of task id -> position")
    for tid, q in positions.items():
        if isinstance(q, bool) or not isinstance(q, int):
            raise InputError(f"solution.queue_position.{tid}: position must be an integer")
    owners = d.get("rb_owner", [None] * inst.rb_count)
    if not isinstance(owners, list):
        raise InputError("solution.rb_owner: must be a list")
    for j, o in enumerate(owners):
        if o is not None and not isinstance(o, str):
            raise InputError(f"solution.rb_owner[{j}]: must be a task id string or null")
    return Solution(positions, tuple(owners))


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False)


def config_hash(obj: Any) -> str:
    canon = json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode()).hexdigest()
