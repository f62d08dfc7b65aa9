"""
Run configuration parser
Reads the sectioned key=value run document into a validated RunConfig
"""
import logging
import os
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from src.errors import ConfigurationError
from src.state import RunConfig

logger = logging.getLogger(__name__)

TOP_LEVEL = ""

# section -> accepted key -> canonical field
KEYS: Dict[str, Dict[str, str]] = {
    TOP_LEVEL: {"mode": "mode", "seed_label": "seed_label", "tier": "tier"},
    "packet": {
        "shape": "shape", "q": "q", "x0": "x0", "y0": "y0",
        "width": "width", "delta": "width", "d": "width",
    },
    "potential": {
        "shape": "shape", "depth": "depth", "v0": "depth",
        "width": "width", "w": "width", "a": "width",
    },
    "evolution": {
        "mass": "mass", "m": "mass", "t_final": "t_final", "dt": "dt", "dx": "dx",
        "x_min": "x_min", "x_max": "x_max", "r_max": "r_max", "l_max": "l_max",
        "boundary": "boundary",
    },
    "output": {
        "snapshots": "snapshots", "profiles": "profiles", "observables": "observables",
        "observe_every": "observe_every", "profile_field": "profile_field", "output_dir": "output_dir",
    },
    "analysis": {
        "prominence": "prominence", "region_min": "region_min", "region_max": "region_max",
        "fit_t_min": "fit_t_min", "fit_t_max": "fit_t_max", "check_lmax": "check_lmax",
        "delta_l": "delta_l",
    },
    "oracle": {"p_max": "p_max", "n_nodes": "n_nodes", "detour_height": "detour_height"},
    "sweep": {
        "q": "q", "y0": "y0", "x0": "x0", "width": "width", "delta": "width", "d": "width",
        "mass": "mass", "m": "mass", "depth": "depth", "v0": "depth",
    },
}


def _float_list(text: str) -> List[float]:
    return [float(item) for item in text.split(",") if item.strip()]


def _profile_list(text: str) -> List[Dict[str, Optional[float]]]:
    """`angle@time` items; a bare angle means the final time"""
    profiles = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        angle, _, time = item.partition("@")
        profiles.append({"angle": float(angle), "time": float(time) if time.strip() else None})
    return profiles


def _word_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


CONVERTERS: Dict[Tuple[str, str], Callable[[str], Any]] = {
    ("packet", "q"): float, ("packet", "x0"): float, ("packet", "y0"): float, ("packet", "width"): float,
    ("potential", "depth"): float, ("potential", "width"): float,
    ("evolution", "mass"): float, ("evolution", "t_final"): float, ("evolution", "dt"): float,
    ("evolution", "dx"): float, ("evolution", "x_min"): float, ("evolution", "x_max"): float,
    ("evolution", "r_max"): float, ("evolution", "l_max"): int,
    ("output", "snapshots"): _float_list, ("output", "profiles"): _profile_list,
    ("output", "observables"): _word_list, ("output", "observe_every"): float,
    ("analysis", "prominence"): float, ("analysis", "region_min"): float,
    ("analysis", "region_max"): float, ("analysis", "fit_t_min"): float,
    ("analysis", "fit_t_max"): float, ("analysis", "check_lmax"): _bool, ("analysis", "delta_l"): int,
    ("oracle", "p_max"): float, ("oracle", "n_nodes"): int, ("oracle", "detour_height"): float,
}


class _Entry:
    def __init__(self, raw: str, alias: str, line: Optional[int]):
        self.raw = raw
        self.alias = alias
        self.line = line


def _split_lines(text: str) -> Dict[Tuple[str, str], _Entry]:
    entries: Dict[Tuple[str, str], _Entry] = {}
    section = TOP_LEVEL
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigurationError(f"malformed section header {line!r}", key=line, line=number)
            section = line[1:-1].strip().lower()
            if section not in KEYS or section == TOP_LEVEL:
                raise ConfigurationError(f"unknown section [{section}]", key=section, line=number)
            continue
        if "=" not in line:
            raise ConfigurationError(f"expected key = value, got {line!r}", key=line, line=number)
        key, _, value = line.partition("=")
        _store(entries, section, key.strip().lower(), value.strip(), number)
    return entries


def _qualified(section: str, key: str) -> str:
    return key if section == TOP_LEVEL else f"{section}.{key}"


def _store(
    entries: Dict[Tuple[str, str], _Entry],
    section: str,
    key: str,
    value: str,
    line: Optional[int],
    replace: bool = False,
) -> None:
    known = KEYS[section]
    if key not in known:
        raise ConfigurationError("unknown key", key=_qualified(section, key), line=line)
    field = known[key]
    if section == "sweep":
        existing = [k for s, k in entries if s == "sweep"]
        if existing and existing[0] != field and not replace:
            raise ConfigurationError(
                "only one parameter may be swept", key=_qualified(section, key), line=line
            )
        if replace:
            for stale in existing:
                entries.pop(("sweep", stale))
    previous = entries.get((section, field))
    if previous is not None and not replace:
        if previous.alias != key:
            raise ConfigurationError(
                f"contradicts '{_qualified(section, previous.alias)}' on line {previous.line}",
                key=_qualified(section, key),
                line=line,
            )
        raise ConfigurationError(
            f"duplicate key, first set on line {previous.line}", key=_qualified(section, key), line=line
        )
    entries[(section, field)] = _Entry(value, key, line)


def _apply_override(entries: Dict[Tuple[str, str], _Entry], override: str) -> None:
    if "=" not in override:
        raise ConfigurationError(f"override must read section.key=value, got {override!r}", key=override)
    target, _, value = override.partition("=")
    section, _, key = target.strip().lower().rpartition(".")
    if section not in KEYS:
        raise ConfigurationError(f"unknown section in override {override!r}", key=target.strip())
    _store(entries, section, key, value.strip(), None, replace=True)


def _build(entries: Dict[Tuple[str, str], _Entry]) -> Dict[str, Any]:
    data: Dict[str, Any] = {}
    for (section, field), entry in entries.items():
        if section == "sweep":
            try:
                values = _float_list(entry.raw)
            except ValueError as e:
                raise ConfigurationError(f"cannot parse {entry.raw!r}: {e}", key=_qualified(section, entry.alias), line=entry.line)
            data["sweep"] = {"key": field, "values": values}
            continue
        convert = CONVERTERS.get((section, field), str)
        try:
            value = convert(entry.raw)
        except ValueError as e:
            raise ConfigurationError(
                f"cannot parse {entry.raw!r}: {e}", key=_qualified(section, entry.alias), line=entry.line
            )
        if section == TOP_LEVEL:
            data[field] = value
        else:
            data.setdefault(section, {})[field] = value
    return data


def _locate(entries: Dict[Tuple[str, str], _Entry], loc: Sequence[Any]) -> Tuple[str, Optional[int]]:
    parts = [str(p) for p in loc if not isinstance(p, int)]
    if not parts:
        return "config", None
    if len(parts) == 1:
        entry = entries.get((TOP_LEVEL, parts[0]))
        return parts[0], entry.line if entry else None
    entry = entries.get((parts[0], parts[1]))
    if entry is None:
        return ".".join(parts[:2]), None
    return _qualified(parts[0], entry.alias), entry.line


def _check_consistency(config: RunConfig, entries: Dict[Tuple[str, str], _Entry]) -> None:
    def fail(message: str, section: str, field: str) -> None:
        entry = entries.get((section, field))
        alias = entry.alias if entry else field
        raise ConfigurationError(message, key=_qualified(section, alias), line=entry.line if entry else None)

    t_final = config.evolution.t_final
    for t in config.output.snapshots:
        if t < 0 or t > t_final:
            fail(f"snapshot time {t} outside [0, t_final={t_final}]", "output", "snapshots")
    for request in config.output.profiles:
        if request.time > t_final:
            fail(f"profile time {request.time} exceeds t_final={t_final}", "output", "profiles")
    if config.mode == "run2d" and config.packet.shape != "gaussian":
        fail(f"run2d needs a gaussian packet, got '{config.packet.shape}'", "packet", "shape")
    if config.mode in ("oracle", "compare"):
        if config.packet.shape != "square":
            fail(f"{config.mode} needs a square packet, got '{config.packet.shape}'", "packet", "shape")
        if config.potential.shape != "square":
            fail(f"{config.mode} needs a square well, got '{config.potential.shape}'", "potential", "shape")
    analysis = config.analysis
    if analysis.region_min is not None and analysis.region_max is not None:
        if analysis.region_min >= analysis.region_max:
            fail("region_min must be below region_max", "analysis", "region_min")
    if analysis.fit_t_min is not None and analysis.fit_t_max is not None:
        if analysis.fit_t_min >= analysis.fit_t_max:
            fail("fit_t_min must be below fit_t_max", "analysis", "fit_t_min")


def parse_config(text: str, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Parse a run document into a RunConfig.

    `#` starts a comment; `[section]` headers switch section. Keys outside any
    section are top-level. Overrides (`section.key=value`) replace file values.

    Args:
        text: Document text
        overrides: Command-line overrides applied before validation

    Returns:
        Validated configuration with defaults filled in

    Raises:
        ConfigurationError: unknown keys, contradictions or invalid values,
            naming the key and line
    """
    entries = _split_lines(text)
    for override in overrides:
        _apply_override(entries, override)
    if (TOP_LEVEL, "mode") not in entries:
        raise ConfigurationError("missing required key", key="mode")

    data = _build(entries)
    t_final = data.get("evolution", {}).get("t_final", 200.0)
    for request in data.get("output", {}).get("profiles", []):
        if request["time"] is None:
            request["time"] = t_final
    if ("output", "output_dir") not in entries:
        data.setdefault("output", {})["output_dir"] = os.getenv("WELLPACKET_OUTPUT_DIR", "output")

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key, line = _locate(entries, first["loc"])
        raise ConfigurationError(first["msg"], key=key, line=line) from e

    _check_consistency(config, entries)
    logger.debug("parsed %s config with %d explicit keys", config.mode, len(entries))
    return config


def load_config(path: str, overrides: Sequence[str] = ()) -> Tuple[RunConfig, str]:
    """Read and parse a config file; returns the config and its text"""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_config(text, overrides), text


SWEEP_TARGETS = {
    "q": "packet", "y0": "packet", "x0": "packet", "width": "packet",
    "mass": "evolution", "depth": "potential",
}


def expand_variants(config: RunConfig) -> List[Tuple[str, RunConfig]]:
    """
    One (label, config) per sweep value, or a single unlabeled run.

    The label names the sub-directory of the variant, e.g. `q_0.5`.
    """
    if config.sweep is None:
        return [("", config)]
    key = config.sweep.key
    section = SWEEP_TARGETS[key]
    variants = []
    for value in config.sweep.values:
        updated = getattr(config, section).model_copy(update={key: value})
        variant = config.model_copy(update={section: updated})
        try:
            variant = RunConfig.model_validate(variant.model_dump())
        except ValidationError as e:
            raise ConfigurationError(e.errors()[0]["msg"], key=f"sweep.{key}") from e
        variants.append((f"{key}_{value:g}", variant))
    return variants


def _render_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        if value and isinstance(value[0], dict):
            return ", ".join(f"{item['angle']!r}@{item['time']!r}" for item in value)
        return ", ".join(_render_value(item) for item in value)
    return str(value)


def render_config(config: RunConfig, full: bool = True) -> str:
    """
    Write a RunConfig back as a run document that parse_config reads unchanged.

    With full=False only values that differ from the defaults are written.
    """
    data = config.model_dump(exclude_defaults=not full)
    lines = [f"mode = {config.mode}"]
    for key in ("seed_label", "tier"):
        if key in data and (full or data[key]):
            if data[key] != "":
                lines.append(f"{key} = {data[key]}")
    for section in ("packet", "potential", "evolution", "output", "analysis", "oracle"):
        fields = {k: v for k, v in data.get(section, {}).items() if v is not None and v != []}
        if not fields:
            continue
        lines.append("")
        lines.append(f"[{section}]")
        lines += [f"{key} = {_render_value(value)}" for key, value in fields.items()]
    if config.sweep is not None:
        lines += ["", "[sweep]", f"{config.sweep.key} = {_render_value(config.sweep.values)}"]
    return "\n".join(lines) + "\n"
