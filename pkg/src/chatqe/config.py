"""Configuration files (JSON or YAML), dotted-key access, and environment
overrides for deployment-level settings.
"""

import json
import os
from pathlib import Path

from .errors import ValidationError

# env var -> (dotted key, coercion)
ENV_OVERRIDES = {
    "CHATQE_SERVER_PORT": ("server.port", int),
    "CHATQE_STORAGE_DIR": ("storage.dir", str),
    "CHATQE_DETECTOR_MODEL_PATH": ("detector.model_path", str),
    "CHATQE_DETECTOR_THRESHOLD": ("detector.threshold", float),
}


def load_config(path, environ=None):
    """Parse a JSON or YAML config file and apply environment overrides."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        import yaml

        config = yaml.safe_load(text) or {}
    else:
        try:
            config = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON config: {exc}") from exc
    if not isinstance(config, dict):
        raise ValidationError(f"{path}: config root must be a mapping")
    return apply_env_overrides(config, environ)


def apply_env_overrides(config, environ=None):
    environ = os.environ if environ is None else environ
    for name, (key, coerce) in ENV_OVERRIDES.items():
        if name in environ:
            try:
                set_key(config, key, coerce(environ[name]))
            except ValueError as exc:
                raise ValidationError(f"env {name}: {exc}") from exc
    return config


def get_key(config, dotted, default=None):
    """Fetch config["a"]["b"] via "a.b"; returns default when any level is missing."""
    node = config
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def set_key(config, dotted, value):
    parts = dotted.split(".")
    node = config
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ValidationError(f"config key {dotted!r} collides with a non-mapping value")
    node[parts[-1]] = value
    return config
