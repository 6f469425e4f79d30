"""Experiment configuration: flat ``key = value`` text with range checks.

The same text form is written at the top of every artifact (as ``# key =
value`` comment lines), so an artifact can be fed back through ``--config``
to reproduce it.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError

SCHEMA_VERSION = "v1"

BETA_MIN, BETA_MAX = 80.0, 100.0
METHODS = ("hf", "vqe", "iqpe-over-vqe", "fci")
GUESSES = ("zero", "mp2")
WINDOWS = ("centered", "bottom")
MAX_BITS = 24
MAX_SEED = 2 ** 64 - 1

_LIST_KEYS = {"betas": float, "methods": str, "preps": str, "guesses": str,
              "shots": int, "checkpoints": int}
_SCALAR_KEYS = {"radius": float, "vqe_evals": int, "bits": int, "bits_min": int,
                "bits_max": int, "repetitions": int, "window": str, "tie_bit": int,
                "plots": bool, "seed": int, "out": str, "threads": int}


@dataclass(frozen=True)
class ExperimentConfig:
    betas: tuple = ()
    radius: float = 1.738
    methods: tuple = METHODS
    preps: tuple = ("hf", "uccd-full(200)", "uccd-min(24)")
    guesses: tuple = GUESSES
    vqe_evals: int = 1000
    bits: int = 0           # 0: subcommand default (16 for pes, 14 for shot-stats)
    bits_min: int = 4
    bits_max: int = 16
    shots: tuple = (25, 50, 100, 10000)
    repetitions: int = 40
    checkpoints: tuple = (0, 10, 25, 50, 100, 200, 300, 500, 750, 1000)
    window: str = "centered"
    tie_bit: int = 1
    plots: bool = False
    seed: int = 0
    out: str = "."
    threads: int = 1

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in _LIST_KEYS:
                v = ", ".join(_fmt(x) for x in v)
            else:
                v = _fmt(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {f.name: (list(getattr(self, f.name)) if f.name in _LIST_KEYS else getattr(self, f.name))
                for f in fields(self)}

    def updated(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _convert(key: str, raw: str, typ):
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw, 10)
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None


def parse_value(key: str, raw: str):
    if key in _LIST_KEYS:
        items = [x for x in (s.strip() for s in _split_list(raw)) if x]
        return tuple(_convert(key, x, _LIST_KEYS[key]) for x in items)
    if key in _SCALAR_KEYS:
        return _convert(key, raw, _SCALAR_KEYS[key])
    raise ConfigError(f"unknown config key {key!r}")


def _split_list(raw: str):
    # commas inside parentheses belong to the item, e.g. "uccd-full(200)"
    depth, cur = 0, []
    for ch in raw:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            yield "".join(cur)
            cur = []
        else:
            cur.append(ch)
    yield "".join(cur)


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines.

    Blank lines and ``#`` comments are skipped.  Text whose first line is an
    artifact schema marker is read as an artifact header instead: only the
    leading ``# key = value`` lines count and the CSV body is ignored.
    """
    lines = text.splitlines()
    artifact = bool(lines) and lines[0].startswith("# schema:")
    updates = {}
    for n, line in enumerate(lines, start=1):
        s = line.strip()
        if artifact:
            if not s.startswith("#"):
                break
            s = s.lstrip("#").strip()
            if s.startswith("schema:"):
                continue
        elif not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigError(f"line {n}: expected 'key = value', got {line!r}")
        key, raw = s.split("=", 1)
        key = key.strip()
        if key in updates:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        updates[key] = parse_value(key, raw)
    return (base or ExperimentConfig()).updated(**updates)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def validate(cfg: ExperimentConfig, command: str) -> ExperimentConfig:
    """Range-check every field; raises ConfigError."""
    if not cfg.betas:
        raise ConfigError("betas must not be empty")
    for b in cfg.betas:
        if not BETA_MIN <= b <= BETA_MAX:
            raise ConfigError(f"beta {b} outside [{BETA_MIN:g}, {BETA_MAX:g}] degrees")
        if b == 90.0:
            raise ConfigError("beta = 90 is the exactly degenerate square geometry; "
                              "use 89.8 and 90.2 to approach it from either side")
    if not cfg.radius > 0.0:
        raise ConfigError("radius must be positive")
    bad = set(cfg.methods) - set(METHODS)
    if bad or not cfg.methods:
        raise ConfigError(f"methods must be a non-empty subset of {METHODS}, got {cfg.methods}")
    bad = set(cfg.guesses) - set(GUESSES)
    if bad or not cfg.guesses:
        raise ConfigError(f"guesses must be a non-empty subset of {GUESSES}, got {cfg.guesses}")
    if not cfg.preps:
        raise ConfigError("preps must not be empty")
    if cfg.vqe_evals < 1:
        raise ConfigError("vqe_evals must be >= 1")
    if not 0 <= cfg.bits <= MAX_BITS:
        raise ConfigError(f"bits must be in [1, {MAX_BITS}] (0 selects the default)")
    if not 1 <= cfg.bits_min <= cfg.bits_max <= MAX_BITS:
        raise ConfigError(f"need 1 <= bits_min <= bits_max <= {MAX_BITS}")
    if not cfg.shots or min(cfg.shots) < 1:
        raise ConfigError("shots must be a non-empty list of positive integers")
    if cfg.repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if not cfg.checkpoints or min(cfg.checkpoints) < 0:
        raise ConfigError("checkpoints must be non-negative evaluation indices")
    if cfg.window not in WINDOWS:
        raise ConfigError(f"window must be one of {WINDOWS}")
    if cfg.tie_bit not in (0, 1):
        raise ConfigError("tie_bit must be 0 or 1")
    if not 0 <= cfg.seed <= MAX_SEED:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    return cfg


def command_defaults(command: str, grid) -> dict:
    """Per-subcommand defaults applied before config files and overrides."""
    single = {"iqpe-conv": (80.0, 85.0, 89.8), "overlap-scan": (89.8,), "shot-stats": (89.8,),
              "fcidump-export": (80.0,), "hamiltonian-dump": (80.0,)}
    betas = tuple(grid) if command == "pes" else single[command]
    return {"betas": betas}
