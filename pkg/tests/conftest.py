from __future__ import annotations

import os
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Dict, Sequence, Tuple

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

os.environ.setdefault("LOG_LEVEL", "WARNING")

from hypercheck.services.pseries import ExponentGrid, PuiseuxSeries  # noqa: E402
from hypercheck.services.scalars import GaussianRational  # noqa: E402


def poly(terms: Dict[Tuple[int, ...], object], order: int, ram: Sequence[int] = None) -> PuiseuxSeries:
    """Offset-free series from {grid exponents: coefficient}."""

    nvars = len(next(iter(terms))) if terms else len(ram)
    grid = ExponentGrid(tuple(ram)) if ram else ExponentGrid.plain(nvars)
    return PuiseuxSeries(grid, (0,) * nvars, terms, order)


def random_series(rng: random.Random, nvars: int, order: int, dense: float = 0.6) -> PuiseuxSeries:
    """Random small-integer series with constant term in 1..3."""

    terms = {}
    for exps in _exponents(nvars, order):
        if not any(exps):
            terms[exps] = rng.randint(1, 3)
        elif rng.random() < dense:
            terms[exps] = GaussianRational(Fraction(rng.randint(-4, 4), rng.randint(1, 3)), rng.choice((0, 0, 1, -1)))
    return poly(terms, order)


def _exponents(nvars: int, order: int):
    if nvars == 0:
        yield ()
        return
    for head in range(order):
        for tail in _exponents(nvars - 1, order - head):
            yield (head,) + tail


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240517)
