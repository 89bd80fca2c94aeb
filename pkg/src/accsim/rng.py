"""Seeded random substreams.

A master seed is split with numpy's SeedSequence; child 1 drives the
attacker and child 2 the IDS, each through a counter-based Philox generator.
"""

from __future__ import annotations

import numpy as np

ATTACK_STREAM = 1
IDS_STREAM = 2


def derive_seed(master_seed: int, stream: int) -> int:
    children = np.random.SeedSequence(master_seed).spawn(stream + 1)
    return int(children[stream].generate_state(2, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))
