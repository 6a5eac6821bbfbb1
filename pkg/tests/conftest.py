import numpy as np
import pytest

from shockhash._kernels import HAS_COMPILED, get_backend
from shockhash.keys import HashedKey, synthetic_hashed


@pytest.fixture(scope="session")
def pure():
    return get_backend("pure")


@pytest.fixture(scope="session")
def compiled():
    if not HAS_COMPILED:
        pytest.skip("compiled backend not built")
    return get_backend("compiled")


def hashed_leaf(n, gen_seed):
    """Random leaf as a list of HashedKey."""
    hi, lo = synthetic_hashed(n, gen_seed)
    return [HashedKey(int(a), int(b)) for a, b in zip(hi, lo)]


def hashed_arrays(n, gen_seed):
    hi, lo = synthetic_hashed(n, gen_seed)
    return [int(x) for x in hi], [int(x) for x in lo]
