import csv
import json
import logging

import numpy as np
from PIL import Image

from util import util


def _builtin(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def compact(config):
    return json.dumps(config, sort_keys=True, separators=(",", ":"), default=_builtin)


def output_path(name, suffix):
    util.Paths.OUTPUT.mkdir(parents=True, exist_ok=True)
    return util.Paths.OUTPUT / f"{name}{suffix}"


def write_csv(name, header, rows, config):
    """CSV preceded by '# ' lines naming the tool version and the resolved config"""
    path = output_path(name, ".csv")
    with path.open("w", encoding="utf-8", newline="") as fp:
        fp.write(f"# {util.TOOL_NAME} {util.VERSION}\n")
        fp.write(f"# config: {compact(config)}\n")
        writer = csv.writer(fp, delimiter=",", quotechar='"', lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_builtin(v) if isinstance(v, (np.integer, np.floating)) else v for v in row])
    logging.debug(f"wrote {path}")
    return path


def read_csv(path):
    """(header, rows) of a file written by write_csv, comment lines skipped"""
    with open(path, encoding="utf-8", newline="") as fp:
        reader = csv.reader(line for line in fp if not line.startswith("#"))
        header = next(reader)
        return header, list(reader)


def write_json(name, data, config):
    path = output_path(name, ".json")
    document = dict(data, config=config, version=util.VERSION, tool=util.TOOL_NAME)
    with path.open("w", encoding="utf-8") as fp:
        json.dump(document, fp, indent="  ", ensure_ascii=False, sort_keys=True, default=_builtin)
    logging.debug(f"wrote {path}")
    return path


def write_graymap(name, levels):
    """8-bit binary graymap (P5)"""
    path = output_path(name, ".pgm")
    Image.fromarray(np.ascontiguousarray(levels, dtype=np.uint8)).save(path, format="PPM")
    logging.debug(f"wrote {path}")
    return path
