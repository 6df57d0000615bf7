"""CSV and run-manifest persistence.

Every CSV starts with a `#`-prefixed JSON header block carrying the
manifest hash and the parameters that produced it, so files are
self-describing and byte-deterministic for a fixed config and seed.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Iterable, Mapping, Sequence


def config_hash(config: Mapping) -> str:
    """Content hash of a config mapping (canonical JSON, sha256)."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence],
              header: Mapping) -> None:
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.16e}"
    if isinstance(v, complex):
        return f"{v.real:.16e}+{v.imag:.16e}j"
    return str(v)


class RunManifest:
    """Registry of the files one command run produced."""

    def __init__(self, out_dir: str, config: Mapping, rng_seed=None,
                 tool_version: str = "unknown"):
        self.out_dir = out_dir
        self.config = dict(config)
        self.hash = config_hash(self.config)
        self.rng_seed = rng_seed
        self.tool_version = tool_version
        self.outputs: dict[str, dict] = {}
        self.timings: dict[str, float] = {}
        self.extra: dict = {}

    def csv_header(self, **kw) -> dict:
        return {"manifest_hash": self.hash, "params": self.config, **kw}

    def register(self, name: str, path: str) -> None:
        self.outputs[name] = {
            "path": os.path.relpath(path, self.out_dir),
            "sha256": file_sha256(path),
        }

    def write(self, name: str = "manifest.json") -> str:
        path = os.path.join(self.out_dir, name)
        payload = {
            "config": self.config,
            "config_hash": self.hash,
            "rng_seed": self.rng_seed,
            "tool_version": self.tool_version,
            "outputs": self.outputs,
            "timings_sec": self.timings,
            **self.extra,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def verify_manifest(manifest_path: str) -> list[str]:
    """Recompute output hashes; returns a list of problems (empty = ok)."""
    with open(manifest_path) as fh:
        payload = json.load(fh)
    base = os.path.dirname(os.path.abspath(manifest_path))
    problems = []
    for name, entry in payload.get("outputs", {}).items():
        path = os.path.join(base, entry["path"])
        if not os.path.exists(path):
            problems.append(f"{name}: missing file {entry['path']}")
            continue
        actual = file_sha256(path)
        if actual != entry["sha256"]:
            problems.append(f"{name}: hash mismatch for {entry['path']}")
    return problems
