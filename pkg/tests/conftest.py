import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import make_class_blobs, make_ctg_scale  # noqa: E402

# Real benchmark CSV: env var first, then the conventional repo location.
_CTG_CANDIDATES = [
    os.environ.get("CTG_CSV"),
    Path(__file__).resolve().parents[1] / "data" / "ctg.csv",
]


def ctg_csv_path():
    for candidate in _CTG_CANDIDATES:
        if candidate and Path(candidate).exists():
            return Path(candidate)
    return None


requires_ctg = pytest.mark.skipif(
    ctg_csv_path() is None,
    reason="real cardiotocography CSV not available (set CTG_CSV or add data/ctg.csv)",
)


@pytest.fixture(scope="session")
def small_blobs():
    """Well-separated three-class sample small enough for exact oracles."""
    return make_class_blobs((60, 45, 35), 6, separation=8.0, latent_dim=3, seed=11)


@pytest.fixture(scope="session")
def ctg_scale():
    """Benchmark-shaped synthetic sample (2126 x 21, class sizes 1655/295/176)."""
    return make_ctg_scale(seed=7)
