import random

import pytest


def random_symbols(rng: random.Random, length: int, alphabet: int = 16) -> tuple:
    return tuple(rng.randrange(alphabet) for _ in range(length))


def plant_edits(x: tuple, e: int, rng: random.Random, alphabet: int = 16) -> tuple:
    """e random edits; new symbols come from a disjoint range so the
    edit distance is exactly e for e << len(x)."""
    y = list(x)
    for _ in range(e):
        op = rng.randrange(3)
        pos = rng.randrange(len(y)) if y else 0
        if op == 0 and y:
            y[pos] = alphabet + rng.randrange(alphabet)
        elif op == 1 and y:
            del y[pos]
        else:
            y.insert(pos, alphabet + rng.randrange(alphabet))
    return tuple(y)


@pytest.fixture
def rng():
    return random.Random(0xED5EED)
