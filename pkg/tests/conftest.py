from __future__ import annotations

import numpy as np
import pytest

from scg_jit.dataset import N_C
from scg_jit.dataset import N_SCG
from scg_jit.dataset import CommitRecord


@pytest.fixture
def sample_patch_text(shared_datadir):
    return (shared_datadir / "sample.patch").read_text()


def random_records(n: int, seed: int = 0, shift: float = 1.5) -> list[CommitRecord]:
    """Time-ordered records whose buggy rows are shifted by `shift` in every feature."""
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.3).astype(int)
    y[:2] = [0, 1]
    X = rng.normal(size=(n, N_C + 2 * N_SCG)) + shift * y[:, None]
    return [
        CommitRecord(
            commit_id=f"r{i:04d}",
            author_timestamp=1_000 + 10 * i,
            c_features=tuple(X[i, :N_C]),
            a_features=tuple(X[i, N_C : N_C + N_SCG]),
            d_features=tuple(X[i, N_C + N_SCG :]),
            bug_label=int(y[i]),
            category_label=int(i % 7),
        )
        for i in range(n)
    ]


@pytest.fixture
def records():
    return random_records(120)


@pytest.fixture
def make_records():
    return random_records
