import json
import logging
from pathlib import Path

import jsonschema

from util import util
from util.errors import ConfigError


def load_user_config(path):
    if not path:
        return {}
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fp:
            data = json.load(fp)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON ({e.msg}, line {e.lineno})", field="config")
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object", field="config")
    return data


def apply_overrides(config, overrides):
    for item in overrides or []:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError("overrides must look like key=value", field=item)
        util.set_dotted(config, key.strip(), util.ensure_value(raw))
        logging.debug(f"override {key.strip()} = {raw}")
    return config


def validate(command, config):
    schema = util.load_schema(command)
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(config), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        error = errors[0]
        field = ".".join(str(p) for p in error.absolute_path) or command
        raise ConfigError(error.message, field=field)
    return config


def resolve(command, user_config=None, overrides=None):
    """Template defaults, then the user's JSON, then --set overrides; validated before use"""
    config = util.load_template(command)
    util.merge(config, user_config or {})
    apply_overrides(config, overrides)
    return validate(command, config)


def load_figure(name):
    path = util.Paths.FIGURES / f"{name}.json"
    if not path.exists():
        raise ConfigError(f"unknown figure {name!r}; see --list-figures", field="figure")
    figure = util.load_json(path)
    return figure["command"], figure["config"]
