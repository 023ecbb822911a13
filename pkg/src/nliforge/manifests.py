"""Stage manifests: content hashes of inputs and outputs plus the exact
configuration and seed, so any stage can be rerun and compared
byte-for-byte. Manifests deliberately contain no timestamps."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    directory: str | Path,
    stage: str,
    config: Mapping,
    seed: int | None,
    inputs: Mapping[str, str | Path],
    outputs: Mapping[str, str | Path],
    counts: Mapping[str, int] | None = None,
) -> Path:
    manifest = {
        "stage": stage,
        "config": dict(config),
        "seed": seed,
        "inputs": {name: sha256_file(path) for name, path in sorted(inputs.items())},
        "outputs": {name: sha256_file(path) for name, path in sorted(outputs.items())},
        "counts": dict(counts or {}),
    }
    path = Path(directory) / f"manifest-{stage}.json"
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def load_manifest(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)
