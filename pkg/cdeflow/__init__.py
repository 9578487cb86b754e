"""Constrained differential equations with elementary catastrophe potentials."""

__version__ = "0.1.0"

from . import (
    classifier,
    desingularization,
    integrator,
    jumps,
    main,
    potentials,
    slowfast,
    storage,
    strata,
)
from .classifier import classify_cde, find_equilibria, normal_form_instance
from .desingularization import CdeSpec
from .integrator import integrate_cde
from .potentials import CatastropheFamily, ChartPoint, TotalPoint
from .slowfast import builtin_model, convergence_study, integrate_slowfast

__all__ = [
    "CatastropheFamily",
    "CdeSpec",
    "ChartPoint",
    "TotalPoint",
    "builtin_model",
    "classifier",
    "classify_cde",
    "convergence_study",
    "desingularization",
    "find_equilibria",
    "integrate_cde",
    "integrate_slowfast",
    "integrator",
    "jumps",
    "main",
    "normal_form_instance",
    "potentials",
    "slowfast",
    "storage",
    "strata",
]
