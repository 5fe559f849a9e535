"""Shared systems used across the test modules.

Three reference setups cover the suite: the full 2-shift with the
fair-coin potential and a (1, 1.3) roof ("desk" system, small enough to
enumerate by hand), the golden-mean subshift, and the full 2-shift under
the golden-ratio roof (1, (1+sqrt(5))/2) whose roof/observable pair is
rationally independent.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from ruellekit import LocallyConstantPotential, SubshiftSpec, ThetaMetric

PHI = (1.0 + math.sqrt(5.0)) / 2.0


def depth1(spec: SubshiftSpec, values, kind: str = "generic") -> LocallyConstantPotential:
    return LocallyConstantPotential(
        spec=spec, depth=1, values=np.array(values, dtype=float), kind=kind
    )


@pytest.fixture(scope="session")
def full2() -> SubshiftSpec:
    return SubshiftSpec.from_matrix([[1, 1], [1, 1]])


@pytest.fixture(scope="session")
def full3() -> SubshiftSpec:
    return SubshiftSpec.from_matrix([[1, 1, 1], [1, 1, 1], [1, 1, 1]])


@pytest.fixture(scope="session")
def golden() -> SubshiftSpec:
    return SubshiftSpec.from_matrix([[1, 1], [1, 0]])


@pytest.fixture(scope="session")
def metric() -> ThetaMetric:
    return ThetaMetric(0.5)


@pytest.fixture(scope="session")
def desk(full2):
    """Fair-coin normalized potential with roof (1, 1.3) and observable (0.2, 1.1)."""
    f0 = depth1(full2, [-math.log(2.0)] * 2)
    tau = depth1(full2, [1.0, 1.3], kind="roof")
    g = depth1(full2, [0.2, 1.1], kind="observable")
    return f0, tau, g


@pytest.fixture(scope="session")
def golden_roof(full2):
    """Zero potential under the golden-ratio roof; g counts the long symbol."""
    f = depth1(full2, [0.0, 0.0])
    tau = depth1(full2, [1.0, PHI], kind="roof")
    g = depth1(full2, [0.0, 1.0], kind="observable")
    return f, tau, g
