import math

import numpy as np
import pytest

from strata_lab import (
    AtomSet,
    Box,
    RandomStream,
    Segment,
    build_standard_form,
)

# Frozen reference values (hand-derived, see individual tests for the oracles).
LN2 = math.log(2.0)
LN_SQRT2 = 0.5 * math.log(2.0)
H_M3 = LN2 + 0.5 * LN_SQRT2  # 0.8664339756999316
H_ATOMS3 = 1.0397207708399179  # Shannon entropy of (1/2, 1/4, 1/4)

SEED = 20250811


@pytest.fixture
def m1():
    """Paper's standard-form example: 1/2 delta_{0.5} + 1/2 Uniform[0,1], d=1."""
    return build_standard_form(
        [
            (0.5, AtomSet(points=[[0.5]], pmf=[1.0])),
            (0.5, Segment(a=[0.0], b=[1.0])),
        ]
    )


@pytest.fixture
def diag_segment():
    """Uniform law on the diagonal of the unit square: length sqrt(2)."""
    return Segment(a=[0.0, 0.0], b=[1.0, 1.0], values=[1.0 / math.sqrt(2.0)])


@pytest.fixture
def m3(diag_segment):
    """1/2 atom at (0.25, 0.75) + 1/2 uniform diagonal, d=2."""
    return build_standard_form(
        [
            (0.5, AtomSet(points=[[0.25, 0.75]], pmf=[1.0])),
            (0.5, diag_segment),
        ]
    )


@pytest.fixture
def diag_measure(diag_segment):
    return build_standard_form([(1.0, diag_segment)])


@pytest.fixture
def atoms3():
    """Three atoms with pmf (1/2, 1/4, 1/4) on the line."""
    return build_standard_form(
        [(1.0, AtomSet(points=[[0.0], [1.0], [2.0]], pmf=[0.5, 0.25, 0.25]))]
    )


@pytest.fixture
def unit_interval():
    return build_standard_form([(1.0, Segment(a=[0.0], b=[1.0]))])


@pytest.fixture
def unit_square():
    return build_standard_form([(1.0, Box(lo=[0.0, 0.0], hi=[1.0, 1.0]))])


@pytest.fixture
def offgrid_segment():
    """Two-piece density on a shifted segment; nothing aligns with the grid."""
    L = math.hypot(0.9, 0.9)
    return Segment(
        a=[0.05, 0.0],
        b=[0.95, 0.9],
        breaks=[0.0, 1.0 / 3.0, 1.0],
        values=[1.8 / L, 0.6 / L],
    )


@pytest.fixture
def offgrid_measure(offgrid_segment):
    return build_standard_form([(1.0, offgrid_segment)])


@pytest.fixture
def stream():
    return RandomStream(SEED)


def m3_sequence(n_atom: int, n_diag: int):
    """Synthetic M3 sequence with the given label counts (atom label 0)."""
    from strata_lab import LabeledSequence

    ts = np.linspace(0.1, 0.9, n_diag) if n_diag else np.empty(0)
    pts = np.concatenate(
        [
            np.tile([0.25, 0.75], (n_atom, 1)).reshape(n_atom, 2),
            np.stack([ts, ts], axis=1).reshape(n_diag, 2),
        ]
    )
    labels = np.concatenate([np.zeros(n_atom, np.int64), np.ones(n_diag, np.int64)])
    return LabeledSequence(points=pts, labels=labels)
