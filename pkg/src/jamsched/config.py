"""Run configuration: a ``key = value`` file, overridden by command-line flags.

Lines are ``key = value``; ``#`` starts a comment. Ranges are ``lo, hi``;
point lists are either ``a, b, c`` or ``start:stop:step`` (stop inclusive).
Every error message carries the file line or flag it came from.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional

from .channel import BER_MODELS
from .experiments import Scenario, Strategy, SweepSpec
from .solvers import GAConfig
from .taskgen import BITS_PER_KB, GenRanges

FULL_BUDGET = (2000, 500)


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _points(conv: Callable[[str], Any]):
    def parse(s: str) -> tuple:
        s = s.strip()
        if ":" in s:
            start, stop, step = (float(x) for x in s.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            out, k = [], 0
            while start + k * step <= stop + 1e-9:
                out.append(conv(repr(start + k * step)))
                k += 1
        else:
            out = [conv(x) for x in s.split(",") if x.strip()]
        if not out:
            raise ValueError("point list is empty")
        return tuple(out)
    return parse


def _int(s: str) -> int:
    f = float(s)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {s!r}")
    return int(f)


def _num(s: str):
    f = float(s)
    return int(f) if f.is_integer() else f


def _range(conv):
    def parse(s: str) -> tuple:
        parts = [p for p in s.replace(" ", "").split(",") if p]
        if len(parts) != 2:
            raise ValueError(f"expected 'lo, hi', got {s!r}")
        return conv(parts[0]), conv(parts[1])
    return parse


def _strategies(s: str) -> tuple:
    return tuple(Strategy(x.strip()) for x in s.split(",") if x.strip())


def _ber(s: str) -> str:
    s = s.strip()
    if s not in BER_MODELS:
        raise ValueError(f"unknown BER model {s!r}; choose from {sorted(BER_MODELS)}")
    return s


def _positive(conv):
    def parse(s):
        v = conv(s)
        if not v > 0:
            raise ValueError(f"must be positive, got {s!r}")
        return v
    return parse


def _unit(s: str) -> float:
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"must lie in [0, 1], got {s!r}")
    return v


def _seed(s: str) -> int:
    v = _int(s)
    if not 0 <= v < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return v


KEYS: dict[str, Callable[[str], Any]] = {
    "scenario": lambda s: Scenario(s.strip()),
    "rb": _positive(_int),
    "sjnr_db": float,
    "sjnr_points": _points(_num),
    "rb_points": _points(_int),
    "runs": _positive(_int),
    "seed": _seed,
    "lambda": _unit,
    "strategies": _strategies,
    "ga_pop": _positive(_int),
    "ga_gens": _positive(_int),
    "full_budget": _bool,
    "out": str,
    "workers": _positive(_int),
    "ber_model": _ber,
    "m": _int,
    "m_queued": _int,
    "deadline_ms": _range(float),
    "size_bits": _range(_int),
    "load_cycles": _range(_int),
    "bandwidth_hz": _positive(float),
    "cpu_hz": _positive(float),
    "max_infeasible": _unit,
    "verbosity": _int,
}


def read_config_file(path: str) -> dict[str, tuple[str, str]]:
    """Return ``{key: (raw value, provenance)}``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file ({exc.strerror})") from exc
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        out[key] = (value, where)
    return out


def resolve(raw: dict[str, tuple[str, str]]) -> dict[str, Any]:
    values = {}
    for key, (value, where) in raw.items():
        try:
            values[key] = KEYS[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where}: invalid value for {key}: {exc}") from exc
    return values


@dataclass(frozen=True)
class RunConfig:
    spec: SweepSpec
    out: Optional[str] = None
    workers: int = 1
    max_infeasible: float = 0.25
    verbosity: int = 0
    provenance: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        spec = self.spec
        return {
            "scenario": spec.scenario.value,
            "points": list(spec.points),
            "fixed_rb": spec.fixed_rb,
            "fixed_sjnr_db": spec.fixed_sjnr_db,
            "replicates": spec.replicates,
            "strategies": [s.value for s in spec.strategies],
            "lambda": spec.lam,
            "base_seed": spec.base_seed,
            "ber_model": spec.ber_model,
            "modulation": "16-QAM, Gray coded",
            "bits_per_kb": BITS_PER_KB,
            "rb_bandwidth_hz": spec.rb_bandwidth_hz,
            "cpu_hz": spec.cpu_hz,
            "ranges": asdict(spec.ranges),
            "ga": {k: v for k, v in asdict(spec.ga).items() if k not in ("seed", "allow_diversity")},
            "max_infeasible": self.max_infeasible,
        }


def build_run_config(values: dict[str, Any], provenance: dict[str, str]) -> RunConfig:
    """Merge resolved values onto defaults. ``seed`` is mandatory."""
    if "seed" not in values:
        raise ConfigError("--seed: a seed is required for sweeps (flag or 'seed' config key)")

    def where(k):
        return provenance.get(k, k)

    try:
        ranges = GenRanges(
            deadline_ms=values.get("deadline_ms", GenRanges.deadline_ms),
            size_bits=values.get("size_bits", GenRanges.size_bits),
            load_cycles=values.get("load_cycles", GenRanges.load_cycles),
            m=values.get("m", GenRanges.m),
            m_queued=values.get("m_queued", GenRanges.m_queued),
        )
    except ValueError as exc:
        bad = next((k for k in ("deadline_ms", "size_bits", "load_cycles", "m", "m_queued") if k in values), "ranges")
        raise ConfigError(f"{where(bad)}: {exc}") from exc

    pop, gens = FULL_BUDGET if values.get("full_budget") else (200, 100)
    pop = values.get("ga_pop", pop)
    gens = values.get("ga_gens", gens)
    try:
        ga = GAConfig(population_size=pop, max_generations=gens)
    except ValueError as exc:
        raise ConfigError(f"{where('ga_pop')}: {exc}") from exc

    scenario = values.get("scenario", Scenario.SJNR)
    kw: dict[str, Any] = dict(
        scenario=scenario,
        replicates=values.get("runs", 300),
        lam=values.get("lambda", 0.5),
        base_seed=values["seed"],
        ranges=ranges,
        ga=ga,
        ber_model=values.get("ber_model", "awgn"),
        rb_bandwidth_hz=values.get("bandwidth_hz", 1e5),
        cpu_hz=values.get("cpu_hz", 1e9),
    )
    if "strategies" in values:
        kw["strategies"] = values["strategies"]
    if "sjnr_points" in values:
        kw["sjnr_db_points"] = values["sjnr_points"]
    if "rb_points" in values:
        kw["rb_points"] = values["rb_points"]
    if "rb" in values:
        kw["fixed_rb"] = values["rb"]
    if "sjnr_db" in values:
        kw["fixed_sjnr_db"] = values["sjnr_db"]
    try:
        spec = SweepSpec(**kw)
    except ValueError as exc:
        raise ConfigError(f"sweep settings: {exc}") from exc
    return RunConfig(
        spec=spec,
        out=values.get("out"),
        workers=values.get("workers", 1),
        max_infeasible=values.get("max_infeasible", 0.25),
        verbosity=values.get("verbosity", 0),
        provenance=dict(provenance),
    )


def ga_from_values(values: dict[str, Any], seed: int = 0) -> GAConfig:
    pop, gens = FULL_BUDGET if values.get("full_budget") else (200, 100)
    return replace(GAConfig(), population_size=values.get("ga_pop", pop),
                   max_generations=values.get("ga_gens", gens), seed=seed)
