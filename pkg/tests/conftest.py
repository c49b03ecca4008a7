import pytest

from gencircuit.circuit_types import CircuitType
from gencircuit.generate import GenParams, generate_circuit
from gencircuit.library import builtin_library


@pytest.fixture(scope="session")
def library():
    return builtin_library()


@pytest.fixture(scope="session")
def specs(library):
    """One representative circuit per type, fixed seed."""
    return {
        ctype: generate_circuit(GenParams(ctype, seed=42), library)
        for ctype in CircuitType
    }


def make_spec(library, ctype, seed=42, **kwargs):
    return generate_circuit(GenParams(ctype, seed=seed, **kwargs), library)
