"""
Output layer for cdeflow runs.
Écrit les tables (CSV), les rapports (JSON) et le manifeste de chaque commande.
"""

from __future__ import annotations

import json
import logging
import platform
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import pandas as pd

from .base import CheckReport, ValidationError
from .config import get_config

logger = logging.getLogger(__name__)

VERSIONED_PACKAGES = ("numpy", "scipy", "sympy", "pandas")


def to_plain(obj: Any) -> Any:
    """Convertit récursivement les valeurs numpy/pandas en types JSON natifs."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        # JSON strict : NaN et infinis deviennent null
        return value if np.isfinite(value) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, pd.DataFrame):
        return to_plain(obj.to_dict(orient="records"))
    if isinstance(obj, CheckReport):
        return obj.to_dict()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def package_versions() -> Dict[str, str]:
    """Versions des bibliothèques utilisées par le calcul."""
    from . import __version__

    versions = {"python": platform.python_version(), "cdeflow": __version__}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class OutputWriter:
    """Écrivain des artefacts d'une commande dans un dossier local."""

    def __init__(self, output_dir: Optional[Path | str] = None):
        self.output_dir = Path(output_dir) if output_dir is not None else get_config().output_dir
        self.written: List[Path] = []

    def _target(self, name: str, suffix: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / f"{self._sanitize_name(name)}{suffix}"

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        """Écrit une table en CSV (sans index)."""
        target = self._target(name, ".csv")
        frame.to_csv(target, index=False)
        self.written.append(target)
        logger.debug("table %s: %d lignes -> %s", name, len(frame), target)
        return target

    def write_json(self, name: str, payload: Any) -> Path:
        """Écrit un rapport JSON (indent=2, UTF-8 lisible)."""
        target = self._target(name, ".json")
        try:
            text = json.dumps(to_plain(payload), indent=2, ensure_ascii=False)
        except TypeError as exc:
            raise ValidationError(f"rapport {name!r} non sérialisable en JSON: {exc}") from exc
        target.write_text(text + "\n", encoding="utf-8")
        self.written.append(target)
        return target

    def write_all(self, frames: Mapping[str, pd.DataFrame], payloads: Mapping[str, Any]) -> List[Path]:
        paths = [self.write_frame(name, frame) for name, frame in frames.items()]
        paths += [self.write_json(name, payload) for name, payload in payloads.items()]
        return paths

    def write_manifest(
        self,
        *,
        command: str,
        inputs: Mapping[str, Any],
        seed: int,
        tolerances: Mapping[str, float],
        exit_code: int = 0,
        checks: Optional[CheckReport] = None,
    ) -> Path:
        """Manifeste de reproductibilité : entrées, graine, tolérances, versions, sorties."""
        manifest = {
            "command": command,
            "inputs": dict(inputs),
            "seed": seed,
            "tolerances": dict(tolerances),
            "versions": package_versions(),
            "outputs": [path.name for path in self.written],
            "exit_code": exit_code,
            "checks": checks.to_dict() if checks is not None else None,
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        target = self._target("manifest", ".json")
        target.write_text(json.dumps(to_plain(manifest), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return target

    @staticmethod
    def _sanitize_name(name: str) -> str:
        """Nettoie un nom d'artefact pour l'utiliser comme nom de fichier."""
        safe = name.replace(" ", "_").replace("/", "_")
        return "".join(ch for ch in safe if ch.isalnum() or ch in ("_", "-", ".")).lower()
