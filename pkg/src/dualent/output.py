"""Self-describing CSV and JSON outputs.

Every file starts with a run manifest. CSV files carry it as a single
``# manifest: {...}`` comment line; JSON files carry it under ``"manifest"``.
Floats are written with ``repr`` so identical runs give identical bytes.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    parameters: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    tool_version: str = __version__

    def to_json(self) -> dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "toolVersion": self.tool_version,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> RunManifest:
        return cls(data["subcommand"], dict(data["parameters"]), int(data["seed"]), data["toolVersion"])


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(manifest: RunManifest, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = io.StringIO()
    out.write("# manifest: " + json.dumps(manifest.to_json(), sort_keys=True, separators=(",", ":")) + "\n")
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_cell(v) for v in row) + "\n")
    return out.getvalue()


def render_json(manifest: RunManifest, payload: dict[str, Any]) -> str:
    return json.dumps({"manifest": manifest.to_json(), **payload}, indent=2, sort_keys=True) + "\n"


def read_manifest(path: str | Path) -> RunManifest:
    text = Path(path).read_text()
    if text.startswith("# manifest: "):
        return RunManifest.from_json(json.loads(text.splitlines()[0][len("# manifest: ") :]))
    return RunManifest.from_json(json.loads(text)["manifest"])


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    return path
