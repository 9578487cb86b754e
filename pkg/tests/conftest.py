"""Shared fixtures for the cdeflow test suite."""

from __future__ import annotations

import os

import numpy as np
import pytest

from cdeflow.config import Config, get_config, set_config
from cdeflow.desingularization import CdeSpec, PolynomialMap
from cdeflow.potentials import CatastropheFamily, FamilyTag

CRITICAL_FAMILIES = [
    FamilyTag.MORSE,
    FamilyTag.FOLD,
    FamilyTag.CUSP,
    FamilyTag.SWALLOWTAIL,
    FamilyTag.ELLIPTIC_UMBILIC,
    FamilyTag.HYPERBOLIC_UMBILIC,
    FamilyTag.BUTTERFLY,
    FamilyTag.PARABOLIC_UMBILIC,
]

CODIM_THREE = [FamilyTag.SWALLOWTAIL, FamilyTag.ELLIPTIC_UMBILIC, FamilyTag.HYPERBOLIC_UMBILIC]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """Each test starts from the default configuration."""
    for name in list(os.environ):
        if name.startswith("CDEFLOW_"):
            monkeypatch.delenv(name, raising=False)
    previous = get_config()
    set_config(Config())
    yield get_config()
    set_config(previous)


def random_linear_spec(family: CatastropheFamily, rng: np.random.Generator) -> CdeSpec:
    """CdeSpec whose slow field is affine in all variables, with random coefficients."""
    names = family.variable_names
    g = []
    for _ in range(family.slow_dim):
        terms = {tuple(0 for _ in names): float(rng.uniform(-1, 1))}
        for k in range(len(names)):
            exponents = tuple(int(i == k) for i in range(len(names)))
            terms[exponents] = float(rng.uniform(-1, 1))
        g.append(PolynomialMap(names, terms))
    return CdeSpec(family, tuple(g), name="random_affine")
