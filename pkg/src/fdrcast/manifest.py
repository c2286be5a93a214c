"""Run manifests: enough recorded state to reproduce any command exactly.

The manifest is written atomically before a command produces results, then
finalized with an end timestamp afterwards, so a crashed run leaves behind
an honest record of what it was attempting.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seeds: dict = field(default_factory=dict)
    input_digests: dict = field(default_factory=dict)
    tool_version: str = ""
    started_at: str = ""
    finished_at: str = None
    outputs: dict = field(default_factory=dict)


def _now():
    return datetime.now(timezone.utc).isoformat()


def start_manifest(command, parameters, seeds=None, input_digests=None,
                   tool_version=""):
    return RunManifest(
        command=command,
        parameters=parameters,
        seeds=seeds or {},
        input_digests=input_digests or {},
        tool_version=tool_version,
        started_at=_now(),
    )


def write_manifest(manifest, path):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def finalize_manifest(manifest, path):
    manifest.finished_at = _now()
    write_manifest(manifest, path)


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
