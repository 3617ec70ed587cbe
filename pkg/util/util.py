import json
from pathlib import Path
import logging

# Add some colors to the logging output
logging.addLevelName(logging.DEBUG, "\x1b[38;21m%s\033[1;0m" % logging.getLevelName(logging.DEBUG))
logging.addLevelName(logging.INFO, "\x1b[1;32m%s\033[1;0m" % logging.getLevelName(logging.INFO))
logging.addLevelName(logging.WARNING, "\x1b[33;21m%s\033[1;0m" % logging.getLevelName(logging.WARNING))
logging.addLevelName(logging.ERROR, "\x1b[31;21m%s\033[1;0m" % logging.getLevelName(logging.ERROR))

TOOL_NAME = "oam-quantum-walk"
VERSION = "1.0.0"


# Paths
class _Paths:
    def __init__(self):
        self.ROOT = Path(__file__).parent.parent
        self._output = None

    @property
    def OUTPUT(self):
        return self._output if self._output else self.ROOT / "dist"

    @OUTPUT.setter
    def OUTPUT(self, value):
        self._output = Path(value) if value else None

    @property
    def ASSETS(self):
        return self.ROOT / "assets"

    @property
    def SCHEMA(self):
        return self.ASSETS / "schema"

    @property
    def TEMPLATES(self):
        return self.ASSETS / "templates"

    @property
    def FIGURES(self):
        return self.ASSETS / "figures"


# Instantiate our Path class
Paths = _Paths()


def __load(path):
    with path.open(encoding="utf-8") as fp:
        json_data = json.load(fp)
    return json_data


def load_schema(name):
    return __load(Path(Paths.SCHEMA / name).with_suffix(".json"))


def load_template(name):
    return __load(Path(Paths.TEMPLATES / name).with_suffix(".json"))


def load_json(path):
    return __load(Path(path))


def list_figures():
    return sorted(p.stem for p in Paths.FIGURES.glob("*.json"))


options = {"output": False, "workers": 1}


def update_options(_options):
    merge(options, _options)
    Paths.OUTPUT = _options["output"] if _options.get("output") else Paths.OUTPUT


def merge(a, b, path=None):
    """merges b into a"""
    if path is None: path = []
    for key in b:
        if key in a:
            if isinstance(a[key], dict) and isinstance(b[key], dict):
                merge(a[key], b[key], path + [str(key)])
            elif a[key] == b[key]:
                pass  # same value
            else:  # Overwrite value
                a[key] = b[key]
        else:
            a[key] = b[key]
    return a


def set_dotted(d, dotted_key, value):
    """sets d["a"]["b"] = value for the key "a.b", creating levels on the way"""
    *parents, leaf = dotted_key.split(".")
    node = d
    for key in parents:
        if not isinstance(node.get(key), dict):
            node[key] = {}
        node = node[key]
    node[leaf] = value
    return d


def ensure_value(value):
    """Parse a command line value as JSON, fall back to the raw string"""
    if value is None:
        return None
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value.strip('"').strip()

