"""Flat ``key = value`` run configuration with ``[ga]``, ``[mlp]`` and ``[pipeline]`` sections.

Every key is optional; anything omitted keeps the module default. Example::

    [ga]
    population_size = 50
    generations = 100
    mutation_rate = auto        # 1 / number of genes

    [mlp]
    learning_rate = 0.1

    [pipeline]
    hidden_min = 3
    hidden_max = 15
    bias_mode = both            # full | nested | both
"""

from __future__ import annotations

import configparser
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .ga import GaConfig
from .mlp import TrainConfig
from .pipeline import FULL, NESTED, PipelineConfig

BIAS_MODE_FLAGS = {"full": (FULL,), "nested": (NESTED,), "both": (FULL, NESTED)}

_GA_KEYS = {
    "population_size": int,
    "generations": int,
    "crossover_rate": float,
    "mutation_rate": float,
    "tournament_size": int,
    "elite_count": int,
    "init_one_prob": float,
}
_MLP_KEYS = {"learning_rate": float, "max_epochs": int, "error_goal": float}
_PIPELINE_KEYS = {
    "hidden_min": int,
    "hidden_max": int,
    "fitness_hidden": int,
    "inner_folds": int,
    "parsimony_weight": float,
    "eval_runs": int,
    "train_fraction": float,
    "bias_mode": str,
    "knn_k": int,
    "top_genes": int,
    "seed": int,
}
SECTIONS = {"ga": _GA_KEYS, "mlp": _MLP_KEYS, "pipeline": _PIPELINE_KEYS}


def parse_bias_mode(flag: str) -> tuple:
    try:
        return BIAS_MODE_FLAGS[flag]
    except KeyError:
        raise ConfigError(f"bias_mode must be one of {sorted(BIAS_MODE_FLAGS)}, got {flag!r}") from None


def _convert(section: str, key: str, raw: str):
    if section == "ga" and key == "mutation_rate" and raw.lower() == "auto":
        return None
    try:
        return SECTIONS[section][key](raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse config text into ``{section: {key: value}}``, rejecting unknown names."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    out = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        out[section] = {}
        for key, raw in cp.items(section):
            if key not in SECTIONS[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            out[section][key] = _convert(section, key, raw.strip())
    return out


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def build_pipeline_config(values: dict, **overrides) -> PipelineConfig:
    """Turn parsed sections plus CLI overrides (``None`` = not given) into a config."""
    ga = GaConfig(**values.get("ga", {}))
    train = TrainConfig(**values.get("mlp", {}))
    p = dict(values.get("pipeline", {}))
    for k, v in overrides.items():
        if v is not None:
            p[k] = v
    base = PipelineConfig()
    lo, hi = base.hidden_sweep
    kwargs = {
        "ga": ga,
        "mlp_train": train,
        "hidden_sweep": (p.pop("hidden_min", lo), p.pop("hidden_max", hi)),
    }
    if "bias_mode" in p:
        kwargs["bias_modes"] = parse_bias_mode(p.pop("bias_mode"))
    if "population_size" in p or "generations" in p:
        ga_over = {k: p.pop(k) for k in ("population_size", "generations") if k in p}
        pop = ga_over.get("population_size", ga.population_size)
        # a smaller population drags the dependent sizes down with it
        ga_over["tournament_size"] = min(ga.tournament_size, pop)
        ga_over["elite_count"] = min(ga.elite_count, pop - 1)
        kwargs["ga"] = replace(ga, **ga_over)
    return PipelineConfig(**kwargs, **p)
