import numpy as np
import pytest

from mdtransit.model import AtomicState, Transition


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def make_state(state_id, positions, symbol="Cu"):
    positions = np.asarray(positions, dtype=float)
    return AtomicState(state_id, positions, tuple([symbol] * len(positions)))


def make_transition(pos0, pos1, label=("s0", "s1")):
    return Transition(
        label, make_state(label[0], pos0), make_state(label[1], pos1)
    )
