"""Experiment configuration files.

A small TOML subset with no third-party dependency: ``[section]`` or
``[section.sub]`` headers followed by ``key = value`` lines, where a value
is an integer, float, boolean, quoted string, or a flat array of those.
Sections mirror the library modules; every key has a documented default
equal to the white-noise study configuration.
"""

from __future__ import annotations

from .estimators import EstimatorSettings
from .experiments import ExperimentConfig
from .framing import FrameConfig

__all__ = ["ConfigError", "loads", "load_config", "parse_config", "dump_config"]


class ConfigError(ValueError):
    """Malformed configuration file or unknown key."""


def _parse_scalar(text: str, where: str):
    text = text.strip()
    if not text:
        raise ConfigError(f"{where}: empty value")
    if text in ("true", "false"):
        return text == "true"
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse value {text!r}") from None


def _parse_value(text: str, where: str):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError(f"{where}: unterminated array")
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(part, where) for part in inner.split(",") if part.strip()]
    return _parse_scalar(text, where)


def _strip_comment(line: str) -> str:
    out = []
    quote = None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out)


def loads(text: str) -> dict[str, dict[str, object]]:
    """Parse configuration text into {section: {key: value}}."""
    sections: dict[str, dict[str, object]] = {}
    current: dict[str, object] | None = None
    name = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: malformed section header {line!r}")
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"{where}: empty section name")
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        if current is None:
            raise ConfigError(f"{where}: key outside of any [section]")
        key, _, value = line.partition("=")
        current[key.strip()] = _parse_value(value, where)
    return sections


_SCHEMA = {
    "framing": (
        "pilot_symbols",
        "data_symbols",
        "ftn_factor",
        "oversampling",
        "num_pilot_blocks",
        "k_max",
    ),
    "waveform": ("pulse", "rolloff", "span", "symbol_rate", "if_freq_ts"),
    "impairments": ("white_psd_db", "wiener_psd", "init_phase"),
    "estimators.em": ("iterations",),
    "estimators.scoring": ("iterations", "damping"),
    "tracking": ("obs_var_override",),
    "experiments": (
        "esn0_grid_db",
        "trials",
        "seed",
        "pilot_seed",
        "modes",
        "algorithms",
    ),
}


def parse_config(sections: dict[str, dict[str, object]]) -> ExperimentConfig:
    """Resolve parsed sections against the defaults."""
    for name, body in sections.items():
        if name not in _SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        for key in body:
            if key not in _SCHEMA[name]:
                raise ConfigError(f"unknown key {key!r} in section [{name}]")

    base = ExperimentConfig()

    def get(section: str, key: str, default):
        return sections.get(section, {}).get(key, default)

    frame = FrameConfig(
        pilot_symbols=int(get("framing", "pilot_symbols", base.frame.pilot_symbols)),
        data_symbols=int(get("framing", "data_symbols", base.frame.data_symbols)),
        ftn_factor=int(get("framing", "ftn_factor", base.frame.ftn_factor)),
        oversampling=int(get("framing", "oversampling", base.frame.oversampling)),
        num_pilot_blocks=int(
            get("framing", "num_pilot_blocks", base.frame.num_pilot_blocks)
        ),
        k_max=int(get("framing", "k_max", base.frame.k_max)),
    )
    em = EstimatorSettings(
        "em", iterations=int(get("estimators.em", "iterations", base.em.iterations))
    )
    scoring = EstimatorSettings(
        "scoring",
        iterations=int(get("estimators.scoring", "iterations", base.scoring.iterations)),
        damping=float(get("estimators.scoring", "damping", base.scoring.damping)),
    )
    override = get("tracking", "obs_var_override", None)
    return ExperimentConfig(
        frame=frame,
        symbol_rate=float(get("waveform", "symbol_rate", base.symbol_rate)),
        white_psd_db=float(get("impairments", "white_psd_db", base.white_psd_db)),
        wiener_psd=float(get("impairments", "wiener_psd", base.wiener_psd)),
        init_phase=float(get("impairments", "init_phase", base.init_phase)),
        pulse_kind=str(get("waveform", "pulse", base.pulse_kind)),
        rolloff=float(get("waveform", "rolloff", base.rolloff)),
        span=int(get("waveform", "span", base.span)),
        if_freq_ts=float(get("waveform", "if_freq_ts", base.if_freq_ts)),
        em=em,
        scoring=scoring,
        esn0_grid_db=tuple(
            float(v) for v in get("experiments", "esn0_grid_db", base.esn0_grid_db)
        ),
        trials=int(get("experiments", "trials", base.trials)),
        seed=int(get("experiments", "seed", base.seed)),
        pilot_seed=int(get("experiments", "pilot_seed", base.pilot_seed)),
        modes=tuple(str(v) for v in get("experiments", "modes", base.modes)),
        algorithms=tuple(
            str(v) for v in get("experiments", "algorithms", base.algorithms)
        ),
        obs_var_override=None if override is None else float(override),
    )


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(loads(fh.read()))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def dump_config(cfg: ExperimentConfig) -> str:
    """Render a config as text that load_config parses back identically."""
    lines = [
        "[framing]",
        f"pilot_symbols = {cfg.frame.pilot_symbols}",
        f"data_symbols = {cfg.frame.data_symbols}",
        f"ftn_factor = {cfg.frame.ftn_factor}",
        f"oversampling = {cfg.frame.oversampling}",
        f"num_pilot_blocks = {cfg.frame.num_pilot_blocks}",
        f"k_max = {cfg.frame.k_max}",
        "",
        "[waveform]",
        f"pulse = {_fmt(cfg.pulse_kind)}",
        f"rolloff = {_fmt(cfg.rolloff)}",
        f"span = {cfg.span}",
        f"symbol_rate = {_fmt(cfg.symbol_rate)}",
        f"if_freq_ts = {_fmt(cfg.if_freq_ts)}",
        "",
        "[impairments]",
        f"white_psd_db = {_fmt(cfg.white_psd_db)}",
        f"wiener_psd = {_fmt(cfg.wiener_psd)}",
        f"init_phase = {_fmt(cfg.init_phase)}",
        "",
        "[estimators.em]",
        f"iterations = {cfg.em.iterations}",
        "",
        "[estimators.scoring]",
        f"iterations = {cfg.scoring.iterations}",
        f"damping = {_fmt(cfg.scoring.damping)}",
        "",
        "[experiments]",
        f"esn0_grid_db = {_fmt(list(cfg.esn0_grid_db))}",
        f"trials = {cfg.trials}",
        f"seed = {cfg.seed}",
        f"pilot_seed = {cfg.pilot_seed}",
        f"modes = {_fmt(list(cfg.modes))}",
        f"algorithms = {_fmt(list(cfg.algorithms))}",
    ]
    if cfg.obs_var_override is not None:
        lines.extend(["", "[tracking]", f"obs_var_override = {_fmt(cfg.obs_var_override)}"])
    return "\n".join(lines) + "\n"
