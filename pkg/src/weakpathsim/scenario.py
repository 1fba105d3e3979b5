"""Scenario files and deterministic report emission.

A scenario is one experiment description: topology, marking strength,
phases, which beam splitters are in place, the measurement Bob performs,
Alice's conditioning, and the run mode.  The on-disk format is a flat JSON
object, one scenario per file, with exactly the keys below; unknown or
duplicate keys are rejected.

Reports are nested dicts of strings, numbers, booleans and lists.  Emission
is deterministic: stable field order, floats printed with 15 significant
digits, so identical runs produce byte-identical output.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import ScenarioError

TOPOLOGIES = ("three-path", "two-path")
MEASUREMENTS = ("ud", "exit-orthogonal", "min-error", "none")
CONDITIONS = ("detectorD", "exit-i", "exit-ii", "unconditioned")
MODES = ("analytic", "montecarlo", "betting")
SETUP_NAMES = ("polarization-ud", "polarization-min-error", "path-qutrit-ud",
               "path-qutrit-min-error", "path-qutrit-exit")

_SPLITTERS = {"three-path": ("BS1", "BS2", "BS3", "BS4"),
              "two-path": ("BS2", "BS3")}
_EPSILON_MAX = {"three-path": 1.0 / 3.0, "two-path": 0.5}
_EPSILON_MAX_TEXT = {"three-path": "1/3", "two-path": "1/2"}

#: JSON key -> Scenario attribute.
_FIELD_MAP = {
    "topology": "topology",
    "epsilon": "epsilon",
    "phase": "phase",
    "beamSplitters": "beam_splitters",
    "measurement": "measurement",
    "condition": "condition",
    "mode": "mode",
    "trials": "trials",
    "seed": "seed",
    "opticalSetup": "optical_setup",
    "blockedPaths": "blocked_paths",
}

DEFAULT_TRIALS = 100_000
SEED_ENV_VAR = "WPS_SEED"


@dataclass(frozen=True)
class Scenario:
    """Validated description of one experiment run."""

    topology: str
    epsilon: float
    phase: float = 0.0
    beam_splitters: frozenset = None
    measurement: str = "ud"
    condition: str = "unconditioned"
    mode: str = "analytic"
    trials: int = DEFAULT_TRIALS
    seed: int = None
    optical_setup: str = None
    blocked_paths: tuple = ()

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ScenarioError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if not isinstance(self.epsilon, (int, float)) or isinstance(self.epsilon, bool):
            raise ScenarioError("epsilon must be a number")
        limit = _EPSILON_MAX[self.topology]
        if not 0.0 <= float(self.epsilon) <= limit:
            raise ScenarioError(
                f"epsilon out of range: need 0 <= epsilon <= {_EPSILON_MAX_TEXT[self.topology]} "
                f"for {self.topology}, got {self.epsilon}")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if not isinstance(self.phase, (int, float)) or isinstance(self.phase, bool) \
                or not np.isfinite(self.phase):
            raise ScenarioError("phase must be a finite number")
        object.__setattr__(self, "phase", float(self.phase))

        valid_splitters = _SPLITTERS[self.topology]
        splitters = self.beam_splitters
        if splitters is None:
            splitters = frozenset(valid_splitters)
        try:
            splitters = frozenset(str(s) for s in splitters)
        except TypeError:
            raise ScenarioError("beamSplitters must be a list of names") from None
        unknown = splitters - set(valid_splitters)
        if unknown:
            raise ScenarioError(
                f"beamSplitters for {self.topology} must come from {valid_splitters}, "
                f"got {sorted(unknown)}")
        object.__setattr__(self, "beam_splitters", splitters)

        if self.measurement not in MEASUREMENTS:
            raise ScenarioError(f"measurement must be one of {MEASUREMENTS}, "
                                f"got {self.measurement!r}")
        if self.condition not in CONDITIONS:
            raise ScenarioError(f"condition must be one of {CONDITIONS}, "
                                f"got {self.condition!r}")
        if self.mode not in MODES:
            raise ScenarioError(f"mode must be one of {MODES}, got {self.mode!r}")

        if not isinstance(self.trials, int) or isinstance(self.trials, bool):
            raise ScenarioError("trials must be an integer")
        if self.mode in ("montecarlo", "betting") and self.trials < 1:
            raise ScenarioError(f"trials must be >= 1 in {self.mode} mode, got {self.trials}")
        if self.trials < 0:
            raise ScenarioError("trials must be nonnegative")

        if self.seed is not None and (not isinstance(self.seed, int) or isinstance(self.seed, bool)):
            raise ScenarioError("seed must be an integer")
        if self.optical_setup is not None and self.optical_setup not in SETUP_NAMES:
            raise ScenarioError(f"opticalSetup must be one of {SETUP_NAMES}, "
                                f"got {self.optical_setup!r}")

        blocked = tuple(str(p) for p in self.blocked_paths)
        if len(set(blocked)) != len(blocked):
            raise ScenarioError("blockedPaths must not repeat")
        if not set(blocked) <= {"i", "ii", "iii"}:
            raise ScenarioError("blockedPaths entries must come from ('i', 'ii', 'iii')")
        if blocked and self.topology != "three-path":
            raise ScenarioError("blockedPaths apply to the three-path topology only")
        object.__setattr__(self, "blocked_paths", blocked)

        # Cross-field consistency.
        if self.mode == "betting" and self.measurement == "none":
            raise ScenarioError("betting mode needs a measurement (measurement != 'none')")
        if self.measurement == "exit-orthogonal" and self.topology != "three-path":
            raise ScenarioError("exit-orthogonal is a three-path measurement")
        if self.condition == "detectorD":
            needed = "BS4" if self.topology == "three-path" else "BS3"
            if needed not in self.beam_splitters:
                raise ScenarioError(
                    f"condition 'detectorD' needs {needed} in beamSplitters")

    def resolved_seed(self) -> int:
        """Explicit seed, else the WPS_SEED environment default, else 0."""
        if self.seed is not None:
            return int(self.seed)
        env = os.environ.get(SEED_ENV_VAR)
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise ScenarioError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
        return 0

    def with_overrides(self, **overrides) -> "Scenario":
        """Copy with non-None override values (CLI flags beat file values)."""
        updates = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **updates)

    def as_dict(self) -> dict:
        """Canonical JSON-ready mapping with the on-disk key names."""
        return {
            "topology": self.topology,
            "epsilon": self.epsilon,
            "phase": self.phase,
            "beamSplitters": sorted(self.beam_splitters),
            "measurement": self.measurement,
            "condition": self.condition,
            "mode": self.mode,
            "trials": self.trials,
            "seed": self.seed,
            "opticalSetup": self.optical_setup,
            "blockedPaths": list(self.blocked_paths),
        }


def _reject_duplicates(pairs):
    keys = [key for key, _ in pairs]
    seen = set()
    for key in keys:
        if key in seen:
            raise ScenarioError(f"duplicate key {key!r} in scenario file")
        seen.add(key)
    return dict(pairs)


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate one scenario from JSON text."""
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates)
    except ScenarioError:
        raise
    except json.JSONDecodeError as err:
        raise ScenarioError(
            f"scenario syntax error at line {err.lineno}, column {err.colno}: {err.msg}"
        ) from None
    if not isinstance(raw, dict):
        raise ScenarioError("scenario file must contain one JSON object")
    unknown = set(raw) - set(_FIELD_MAP)
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    if "topology" not in raw:
        raise ScenarioError("scenario is missing the required key 'topology'")
    if "epsilon" not in raw:
        raise ScenarioError("scenario is missing the required key 'epsilon'")
    kwargs = {}
    for key, value in raw.items():
        attr = _FIELD_MAP[key]
        if attr == "beam_splitters" and value is not None:
            if not isinstance(value, list):
                raise ScenarioError("beamSplitters must be a list of names")
            value = frozenset(value)
        if attr == "blocked_paths":
            if not isinstance(value, list):
                raise ScenarioError("blockedPaths must be a list")
            value = tuple(value)
        kwargs[attr] = value
    return Scenario(**kwargs)


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical single-scenario JSON text; parse/serialize is idempotent."""
    return emit_report(scenario.as_dict(), "json").decode("utf-8")


# ---------------------------------------------------------------------------
# Deterministic report emission
# ---------------------------------------------------------------------------

def format_float(value: float) -> str:
    """Floats are printed with 15 significant digits everywhere."""
    if value != value:
        raise ScenarioError("reports must not contain NaN")
    return format(float(value), ".15g")


def _emit_json(value, indent: int) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f'{pad}  {json.dumps(str(key))}: {_emit_json(item, indent + 1)}'
                 for key, item in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}  {_emit_json(item, indent + 1)}" for item in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if value is None:
        return "null"
    return json.dumps(str(value))


def _flatten(value, prefix: str = ""):
    if isinstance(value, dict):
        for key, item in value.items():
            yield from _flatten(item, f"{prefix}{key}.")
    elif isinstance(value, (list, tuple)):
        for index, item in enumerate(value):
            yield from _flatten(item, f"{prefix}{index}.")
    else:
        yield prefix[:-1], value


def _cell_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if value is None:
        return ""
    return str(value)


def _emit_csv(report: dict) -> str:
    table = report.get("table")
    if table is not None:
        lines = [",".join(table["header"])]
        for row in table["rows"]:
            lines.append(",".join(_cell_text(cell) for cell in row))
        return "\n".join(lines) + "\n"
    lines = ["key,value"]
    for key, value in _flatten(report):
        lines.append(f"{key},{_cell_text(value)}")
    return "\n".join(lines) + "\n"


def _emit_text(report: dict) -> str:
    lines = []
    for key, value in _flatten(report):
        lines.append(f"{key} = {_cell_text(value)}")
    return "\n".join(lines) + "\n"


def emit_report(report: dict, fmt: str = "json") -> bytes:
    """Render a report deterministically; identical input, identical bytes."""
    if fmt == "json":
        return (_emit_json(report, 0) + "\n").encode("utf-8")
    if fmt == "csv":
        return _emit_csv(report).encode("utf-8")
    if fmt == "text":
        return _emit_text(report).encode("utf-8")
    raise ScenarioError(f"format must be json, csv or text, got {fmt!r}")
