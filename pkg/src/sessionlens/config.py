"""Service configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ServiceConfig:
    """Settings shared by the CLI and the HTTP service."""

    data_dir: Path
    host: str = "127.0.0.1"
    port: int = 8765
    workers: int = 2
    static_dir: Path | None = None

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if self.static_dir is not None:
            self.static_dir = Path(self.static_dir)

    @property
    def plugins_dir(self) -> Path:
        return self.data_dir / "plugins"
