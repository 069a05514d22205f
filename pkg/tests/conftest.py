from importlib import resources

import pytest

from nacifs.conformal import ConformalMap, DomainSpec, GenerationSpec, SystemSpec, autonomous, load_system

DOMAIN = DomainSpec(0.1)


def shipped(name):
    return load_system(resources.files("nacifs") / "data" / f"{name}.json")


def two_disk(ra=0.3, rb=0.3, horizon=40):
    return autonomous(DOMAIN, [ConformalMap.similarity(ra, -0.5), ConformalMap.similarity(rb, 0.5)], horizon)


def quadratic_system(horizon=40):
    return autonomous(DOMAIN, [ConformalMap.quadratic(0.28, -0.5, 0.015j), ConformalMap.quadratic(0.3, 0.5, 0.02)],
                      horizon)


def periodic(ratios, horizon=40):
    gens = tuple(GenerationSpec((ConformalMap.similarity(r, -0.5), ConformalMap.similarity(r, 0.5))) for r in ratios)
    return SystemSpec(domain=DOMAIN, period=gens, horizon=horizon)


@pytest.fixture
def symmetric():
    return two_disk()


@pytest.fixture
def quadratic():
    return quadratic_system()
