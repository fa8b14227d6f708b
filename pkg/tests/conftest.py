import pytest

from tdembed.exactalg import descriptor, gen
from tdembed.groupcat import additive_group


@pytest.fixture(scope="session")
def f5():
    return descriptor("Fp:5")


@pytest.fixture(scope="session")
def f4():
    return descriptor("Fq:4")


@pytest.fixture(scope="session")
def f8():
    return descriptor("Fq:8")


@pytest.fixture(scope="session")
def f9():
    return descriptor("Fq:9")


def _whole_field(f):
    """(F_q, +) inside D^1."""
    if f.kind.value == "prime_field":
        return additive_group(f, 1, [[1]], f"{f.name}+")
    x = gen(f)
    s = len(f.ring.encode(f.ring.zero))
    return additive_group(f, 1, [[x ** i] for i in range(s)], f"{f.name}+")


def _prime_subfield(f):
    return additive_group(f, 1, [[1]], f"F{f.characteristic}+")


@pytest.fixture(scope="session")
def whole_field():
    return _whole_field


@pytest.fixture(scope="session")
def prime_subfield():
    return _prime_subfield
