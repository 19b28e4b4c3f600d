import json
import pathlib
from typing import Any

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    # ---------------------------
    # Logging
    # ---------------------------
    log_level: str = "INFO"

    # ---------------------------
    # Parallelism
    # ---------------------------
    # 0 = use available parallelism (os.cpu_count())
    # 1 = reference single-threaded schedule
    threads: int = 0
    queue_partitions: int = 8

    # ---------------------------
    # Pairing backend
    # ---------------------------
    pairing_backend: str = "transparent"   # "transparent" (reference, non-cryptographic)

    # ---------------------------
    # Benchmarks
    # ---------------------------
    bench_iterations: int = 20

    # ---------------------------
    # Experiment defaults
    # ---------------------------
    # Path to an experiment JSON used when `run` gets no config file.
    # None -> bundled app/experiment.json
    experiment_file: str | None = None

    # ---------------------------
    # Pydantic config
    # ---------------------------
    model_config = SettingsConfigDict(
        env_file=".env",        # load from .env automatically
        extra="ignore",         # ignore unexpected vars in .env
        case_sensitive=False    # accept THREADS or threads
    )

# Create singleton settings object
settings = Settings()


# ---------------------------
# Experiment file loading
# ---------------------------

class ConfigError(ValueError):
    """Unreadable or invalid experiment file; message carries line/field diagnostics."""


def default_experiment_path() -> pathlib.Path:
    """
    Default path: app/experiment.json
    Overridable via settings / env var: EXPERIMENT_FILE
    """
    if settings.experiment_file:
        return pathlib.Path(settings.experiment_file)
    return pathlib.Path(__file__).resolve().parent / "experiment.json"


def _deep_merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    out = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def load_experiment_config(path: str | pathlib.Path | None = None, overrides: dict[str, Any] | None = None):
    """Read an experiment JSON, apply flag overrides (nested dicts merge) and validate."""
    from app.schemas import ExperimentConfig

    path = pathlib.Path(path) if path else default_experiment_path()
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"{path}: file not found") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")

    try:
        return ExperimentConfig.model_validate(_deep_merge(raw, overrides or {}))
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"{path}: {problems}") from e
