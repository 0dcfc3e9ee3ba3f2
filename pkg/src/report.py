"""
Machine-readable run reports.

A report is a list of named sections of `key=value` lines. The text and
JSON renderings carry the same content; timings are rendered only on request.
"""

import hashlib
from pathlib import Path
from typing import Dict, List, Sequence
from pydantic import BaseModel, Field
from src import __version__


class ReportSection(BaseModel):
    name: str
    lines: List[str] = Field(default_factory=list)

    def add(self, key: str, value) -> "ReportSection":
        self.lines.append(f"{key}={value}")
        return self

    def extend(self, text: str) -> "ReportSection":
        self.lines.extend(line for line in text.splitlines() if line)
        return self


class ReportDocument(BaseModel):
    """Report for one CLI invocation; deterministic given the inputs."""

    tool_version: str = __version__
    command: str
    input_digest: str
    status: str = "ok"
    sections: List[ReportSection] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)

    def section(self, name: str) -> ReportSection:
        for existing in self.sections:
            if existing.name == name:
                return existing
        created = ReportSection(name=name)
        self.sections.append(created)
        return created

    def render_text(self, include_timings: bool = False) -> str:
        lines = [
            f"tool_version={self.tool_version}",
            f"command={self.command}",
            f"input_digest={self.input_digest}",
            f"status={self.status}",
        ]
        for section in self.sections:
            lines.append(f"[{section.name}]")
            lines.extend(section.lines)
        if include_timings and self.timings:
            lines.append("[timings]")
            lines.extend(f"{stage}={seconds:.3f}s" for stage, seconds in self.timings.items())
        return "\n".join(lines) + "\n"

    def render_json(self, include_timings: bool = False) -> str:
        exclude = None if include_timings else {"timings"}
        return self.model_dump_json(indent=2, exclude=exclude) + "\n"

    def render(self, fmt: str, include_timings: bool = False) -> str:
        if fmt == "json":
            return self.render_json(include_timings)
        return self.render_text(include_timings)


def digest_inputs(paths: Sequence[Path]) -> str:
    """SHA-256 over the input files' bytes, in argument order."""
    sha = hashlib.sha256()
    for path in paths:
        sha.update(Path(path).read_bytes())
    return sha.hexdigest()
