"""Capacity-approaching, error-adaptive prefix-tree text entry."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def data_path(name: str) -> Path:
    """Path to a bundled data file (e.g. the desk corpus)."""
    return Path(resources.files("treespeller") / "data" / name)


from .alphabet import DEFAULT_ALPHABET, Alphabet, normalize_corpus  # noqa: E402
from .channel import ConfusionMatrix, capacity, estimate_from_counts, mutual_information, uniform_error_channel  # noqa: E402
from .coder import CodingFunction, expected_information, monotonic_code, waterfill  # noqa: E402
from .engine import Posterior, Session, SessionConfig  # noqa: E402
from .lm import WittenBellNgram  # noqa: E402
from .tree import FiniteQueryTree, advance_root, grow, prune, select_tree  # noqa: E402
