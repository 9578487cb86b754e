"""
Configuration management for cdeflow.
Gère les tolérances numériques et les options d'exécution via l'environnement.
"""

from __future__ import annotations

import copy
import os
from pathlib import Path
from typing import Dict, Mapping

from dotenv import load_dotenv

from .base import ValidationError

# Charger les variables d'environnement
load_dotenv()


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ValidationError(f"variable {name}: valeur non numérique {raw!r}") from exc


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"variable {name}: entier attendu, reçu {raw!r}") from exc


# Tolérances surchargeables via --tol.<nom>
TOLERANCE_NAMES = (
    "membership_tol",
    "strata_tol",
    "spectrum_tol",
    "rel_tol",
    "abs_tol",
    "event_tol",
    "det_tol",
    "equilibrium_tol",
    "domain_half_width",
    "horizon",
    "degree_cap",
    "heartbeat_x0",
)


class Config:
    """Configuration centrale basée sur les variables d'environnement."""

    def __init__(self):
        self.output_dir = Path(os.getenv("CDEFLOW_OUTPUT_DIR", "output"))
        self.seed = _env_int("CDEFLOW_SEED", 42)
        self.log_level = os.getenv("CDEFLOW_LOG_LEVEL", "WARNING").upper()

        # Appartenance à S_V, S_V,min et B
        self.membership_tol = _env_float("CDEFLOW_MEMBERSHIP_TOL", 1e-9)
        self.strata_tol = _env_float("CDEFLOW_STRATA_TOL", 1e-8)
        self.spectrum_tol = _env_float("CDEFLOW_SPECTRUM_TOL", 1e-7)

        # Intégration du champ désingularisé
        self.rel_tol = _env_float("CDEFLOW_REL_TOL", 1e-10)
        self.abs_tol = _env_float("CDEFLOW_ABS_TOL", 1e-12)
        self.event_tol = _env_float("CDEFLOW_EVENT_TOL", 1e-12)
        self.det_tol = _env_float("CDEFLOW_DET_TOL", 1e-10)
        self.equilibrium_tol = _env_float("CDEFLOW_EQUILIBRIUM_TOL", 1e-12)
        self.domain_half_width = _env_float("CDEFLOW_DOMAIN_HALF_WIDTH", 3.0)
        self.horizon = _env_float("CDEFLOW_HORIZON", 10.0)

        # Formes normales et modèles intégrés
        self.degree_cap = _env_int("CDEFLOW_DEGREE_CAP", 6)
        # x0 > 1/sqrt(3) : un seul battement puis repos en x0
        self.heartbeat_x0 = _env_float("CDEFLOW_HEARTBEAT_X0", 0.7)

    def tolerances(self) -> Dict[str, float]:
        """Retourne les tolérances actives (écrites dans chaque manifeste)."""
        return {name: getattr(self, name) for name in TOLERANCE_NAMES}

    def with_overrides(self, overrides: Mapping[str, str | float]) -> "Config":
        """Retourne une copie de la configuration avec des tolérances modifiées."""
        updated = copy.copy(self)
        for name, raw in overrides.items():
            if name not in TOLERANCE_NAMES:
                raise ValidationError(
                    f"tolérance inconnue --tol.{name} (attendu: {', '.join(TOLERANCE_NAMES)})"
                )
            current = getattr(self, name)
            try:
                value = int(raw) if isinstance(current, int) else float(raw)
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"--tol.{name}: valeur invalide {raw!r}") from exc
            if value <= 0 and name != "heartbeat_x0":
                raise ValidationError(f"--tol.{name} doit être strictement positif")
            setattr(updated, name, value)
        return updated

    def __repr__(self) -> str:
        return (
            f"Config(output_dir={self.output_dir}, seed={self.seed}, "
            f"membership_tol={self.membership_tol:g}, rel_tol={self.rel_tol:g}, "
            f"horizon={self.horizon:g})"
        )


# Instance globale de configuration
config = Config()


def get_config() -> Config:
    """Retourne l'instance de configuration globale."""
    return config


def set_config(new: Config) -> Config:
    """Remplace la configuration globale (surcharges --tol.* du CLI)."""
    global config
    config = new
    return config
