"""Run directories and manifests that let a run be replayed exactly."""

import datetime as _dt
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from ._validation import ValidationError


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_digest(command, config):
    blob = json.dumps({"command": command, "config": config}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    seeds: list
    version: str = __version__
    timestamp: str = ""
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def write(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")

    @classmethod
    def read(cls, path):
        try:
            data = json.loads(Path(path).read_text())
            return cls(**data)
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ValidationError(f"cannot read manifest {path}: {exc}") from exc


def utc_stamp():
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")


def make_run_dir(base, command, config, stamp=None):
    """``base/<timestamp>-<first 8 hex of the config digest>``, created fresh."""
    stamp = stamp or utc_stamp()
    run = Path(base) / f"{stamp}-{config_digest(command, config)[:8]}"
    run.mkdir(parents=True, exist_ok=False)
    return run, stamp


def compare_outputs(expected, run_dir):
    """Names of outputs whose digest differs (or which are missing) in ``run_dir``."""
    bad = []
    for name, digest in sorted(expected.items()):
        p = Path(run_dir) / name
        if not p.is_file() or sha256_file(p) != digest:
            bad.append(name)
    return bad
