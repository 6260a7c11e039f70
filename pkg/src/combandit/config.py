"""Experiment configuration: flat key=value files, overrides, and presets.

The config file format is UTF-8 lines of `key = value` with `#` comments.
CLI overrides take precedence over file values, file values over preset
values, preset values over defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from combandit.errors import ConfigurationError

ALGORITHMS = ("cnucb", "cnts", "cnts1", "comblinucb", "comblints", "cnucb-d", "cnts-d")


@dataclass
class ExperimentConfig:
    algorithm: str = "cnucb"
    preset: str = ""
    # environment
    d: int = 20
    N: int = 10
    K: int = 3
    T: int = 500
    score_fn: str = "h2_quadratic"
    noise_sd: float = 0.1
    feedback_model: str = "semi_bandit"
    pairing: bool = True
    renormalize: bool = False
    chi: str = ""  # position qualities, comma-separated; default 1/(1+k)
    psi: str = ""  # cascade discounts, comma-separated; default 0.9^k
    # network
    m: int = 100
    L: int = 2
    # training
    lam: float = 1.0
    eta: float = 0.01
    epochs: int = 100
    train_every: int = 10
    batch_super_arms: int = 100
    train_mode: str = "minibatch"
    full_steps: int = 100
    warm_start: bool = True
    # exploration
    explore_mode: str = "practical"
    gamma: float = 1.0
    nu: float = 1.0
    M: int = 10
    epsilon: float = 0.0
    alpha_lin: float = 1.0
    s_norm: float = 1.0
    sigma_sub: float = 1.0
    delta: float = 0.1
    # oracle
    alpha_oracle: float = 1.0
    # doubling
    doubling: bool = False  # promote cnucb/cnts to their -d variants
    epoch_t0: int = 8
    width_schedule: str = "constant"
    m_max: int = 1024
    # runs
    runs: int = 5
    base_seed: int = 0
    workers: int = 0  # 0 = auto
    output: str = "traces.csv"

    def validate(self) -> "ExperimentConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(
                f"unknown algorithm {self.algorithm!r}; choose one of {ALGORITHMS}"
            )
        if not 1 <= self.K <= self.N:
            raise ConfigurationError(f"need 1 <= K <= N, got K={self.K}, N={self.N}")
        if self.T < 1:
            raise ConfigurationError("T must be >= 1")
        if self.runs < 1:
            raise ConfigurationError("runs must be >= 1")
        if not 0.0 < self.alpha_oracle <= 1.0:
            raise ConfigurationError("alpha_oracle must be in (0, 1]")
        if self.feedback_model not in (
            "semi_bandit", "document_based", "position_based", "cascade",
        ):
            raise ConfigurationError(f"unknown feedback model {self.feedback_model!r}")
        if self.score_fn not in ("h1_linear", "h2_quadratic", "h3_cosine"):
            raise ConfigurationError(f"unknown score function {self.score_fn!r}")
        return self

    def chi_values(self) -> list[float]:
        if self.chi:
            return [float(v) for v in self.chi.split(",")]
        return [1.0 / (1 + pos) for pos in range(self.K)]

    def psi_values(self) -> list[float]:
        if self.psi:
            return [float(v) for v in self.psi.split(",")]
        return [0.9**pos for pos in range(self.K)]


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _field_kind(field) -> str:
    return field.type if isinstance(field.type, str) else field.type.__name__


def _parse_value(name: str, raw: str):
    field = _FIELDS.get(name)
    if field is None:
        raise ConfigurationError(f"unknown config key {name!r}")
    raw = raw.strip()
    kind = _field_kind(field)
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ConfigurationError(f"{name} expects true/false, got {raw!r}")
    if kind == "int":
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigurationError(f"{name} expects an integer, got {raw!r}") from exc
    if kind == "float":
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigurationError(f"{name} expects a number, got {raw!r}") from exc
    return raw


def apply_overrides(config: ExperimentConfig, pairs) -> ExperimentConfig:
    """Apply key=value override strings in order."""
    for pair in pairs:
        if "=" not in pair:
            raise ConfigurationError(f"override {pair!r} is not key=value")
        name, raw = pair.split("=", 1)
        name = name.strip()
        setattr(config, name, _parse_value(name, raw))
    return config


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse the flat key=value format, honoring a preset line first."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {line!r}")
        name, raw = line.split("=", 1)
        pairs.append((name.strip(), raw))
    preset_name = next((raw.strip() for name, raw in pairs if name == "preset"), "")
    config = preset(preset_name) if preset_name else ExperimentConfig()
    for name, raw in pairs:
        setattr(config, name, _parse_value(name, raw))
    return config


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def config_to_pairs(config: ExperimentConfig) -> str:
    """Render the resolved config as space-separated key=value pairs."""
    parts = []
    for field in dataclasses.fields(ExperimentConfig):
        value = getattr(config, field.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        parts.append(f"{field.name}={value}")
    return " ".join(parts)


def _desk(score_fn: str) -> ExperimentConfig:
    return ExperimentConfig(
        d=20, N=10, K=3, T=500, score_fn=score_fn, noise_sd=0.1,
        m=50, L=2, epochs=50, train_every=10, eta=0.01, runs=5,
    )


def _exp1(score_fn: str, horizon: int) -> ExperimentConfig:
    return ExperimentConfig(
        d=80, N=20, K=4, T=horizon, score_fn=score_fn, noise_sd=0.1,
        m=100, L=2, epochs=100, train_every=10, eta=0.01, runs=20,
    )


def _exp2(d: int, horizon: int) -> ExperimentConfig:
    cfg = _exp1("h2_quadratic", horizon)
    cfg.d = d
    return cfg


_PRESETS = {
    "exp1-h1": lambda: _exp1("h1_linear", 2000),
    "exp1-h2": lambda: _exp1("h2_quadratic", 2000),
    "exp1-h3": lambda: _exp1("h3_cosine", 4000),
    "exp2-d40": lambda: _exp2(40, 2000),
    "exp2-d80": lambda: _exp2(80, 2000),
    "exp2-d120": lambda: _exp2(120, 4000),
    "desk-h1": lambda: _desk("h1_linear"),
    "desk-h2": lambda: _desk("h2_quadratic"),
    "desk-h3": lambda: _desk("h3_cosine"),
    "desk-h2-d40": lambda: dataclasses.replace(_desk("h2_quadratic"), d=40),
}


def preset_names() -> list[str]:
    return list(_PRESETS)


def preset(name: str) -> ExperimentConfig:
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(_PRESETS)}"
        ) from None
    config = factory()
    config.preset = name
    return config
