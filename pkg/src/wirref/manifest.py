"""Run manifests: config hash, input/output digests, seeds.

Manifest bytes are a pure function of config and file contents (no
timestamps, no absolute run paths), so identical reruns produce identical
manifests.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def build_manifest(
    stage: str,
    version: str,
    config: dict,
    inputs: dict,
    output_paths: dict,
    seeds: dict,
) -> dict:
    return {
        "stage": stage,
        "version": version,
        "config_hash": config_hash(config),
        "config": config,
        # inputs are identified by content digest; storage location is not part
        # of a run's identity
        "inputs": {
            name: {"file": Path(path).name, "sha256": sha256_file(path)}
            for name, path in sorted(inputs.items())
        },
        "outputs": {
            name: sha256_file(path) for name, path in sorted(output_paths.items())
        },
        "seeds": seeds,
    }


def write_manifest(manifest: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
