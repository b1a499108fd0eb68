"""Recursive Bayesian query loop over whole strings.

The posterior over complete strings is the language-model prior times one
multiplicative likelihood factor per past query.  Each query's likelihood
is constant on every leaf region, so factors attach to finitely many
prefix-tree nodes and the posterior stays exact: the belief of any prefix
is computable from language-model marginals plus those factors.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .alphabet import STOP, Alphabet
from .channel import ChannelCapacity, ConfusionMatrix, capacity
from .coder import CodingFunction, expected_information, monotonic_code, waterfill
from .lm import entropy_bits
from .tree import GOBACK, WILDCARD, FiniteQueryTree, advance_root, leaf_records, select_tree

MODES = ("multi", "single", "monotonic")


class Posterior:
    """Exact string posterior: LM prior times per-region factors.

    Factors live on a sparse trie of prefixes.  A string's weight is the
    product of the factors on every node along its path; nodes without
    factors contribute 1.  Factors are normalized per update, so subtree
    masses stay near unit scale.
    """

    def __init__(self, lm, alphabet: Alphabet | None = None):
        self.lm = lm
        self.alphabet = alphabet if alphabet is not None else lm.alphabet
        self._factors: dict[str, float] = {}
        # prefix -> set of next chars leading toward factor-bearing nodes
        self._branches: dict[str, set[str]] = {}
        self._mass_cache: dict[str, float] = {}

    # -- factor bookkeeping ------------------------------------------------

    def multiply_region(self, prefix: str, factor: float) -> None:
        """Multiply the weight of every string with this prefix (for a
        complete-string prefix: that single string)."""
        if prefix == "":
            raise ValueError("the root region is the whole space; factors there are degenerate")
        self._factors[prefix] = self._factors.get(prefix, 1.0) * factor
        for depth in range(len(prefix)):
            self._branches.setdefault(prefix[:depth], set()).add(prefix[depth])
        self._mass_cache.clear()

    def multiply_goback_region(self, root_prefix: str, factor: float) -> None:
        """Multiply every string NOT prefixed by `root_prefix`."""
        for depth in range(len(root_prefix)):
            on_path = root_prefix[depth]
            for c in self.alphabet:
                if c != on_path:
                    self.multiply_region(root_prefix[:depth] + c, factor)

    # -- belief queries ----------------------------------------------------

    def _node_mass(self, prefix: str) -> float:
        """Weighted probability of all completions of `prefix`, conditioned
        on `prefix`, excluding factors at or above it."""
        branches = self._branches.get(prefix)
        if not branches:
            return 1.0
        cached = self._mass_cache.get(prefix)
        if cached is not None:
            return cached
        dist = self.lm.next_char_dist(prefix)
        total = 0.0
        for i, c in enumerate(self.alphabet):
            p = float(dist[i])
            if c in branches:
                child = prefix + c
                f = self._factors.get(child, 1.0)
                if c == STOP:
                    total += p * f
                else:
                    total += p * f * self._node_mass(child)
            else:
                total += p  # no factors below: completions carry weight 1
        self._mass_cache[prefix] = total
        return total

    def _path_weight(self, prefix: str) -> float:
        """Prior path probability times path factors, unnormalized."""
        w = 1.0
        for i, char in enumerate(prefix):
            w *= float(self.lm.next_char_dist(prefix[:i])[self.alphabet.index(char)])
            f = self._factors.get(prefix[: i + 1])
            if f is not None:
                w *= f
            if w == 0.0:
                return 0.0
        return w

    def normalizer(self) -> float:
        return self._node_mass("")

    def belief(self, prefix: str) -> float:
        """Posterior probability that the intended string starts with
        `prefix` (or equals it, when `prefix` is a complete string)."""
        if prefix == "":
            return 1.0
        w = self._path_weight(prefix)
        if w == 0.0:
            return 0.0
        if not prefix.endswith(STOP):
            w *= self._node_mass(prefix)
        return w / self.normalizer()

    def next_char_dist(self, prefix: str) -> np.ndarray:
        """Posterior next-character distribution after `prefix`."""
        dist = self.lm.next_char_dist(prefix)
        out = np.empty(len(self.alphabet))
        for i, c in enumerate(self.alphabet):
            child = prefix + c
            w = float(dist[i]) * self._factors.get(child, 1.0)
            if c != STOP:
                w *= self._node_mass(child)
            out[i] = w
        total = out.sum()
        if total <= 0.0:
            raise RuntimeError(f"posterior has no mass under prefix {prefix!r}")
        return out / total

    def map_decision(self, alpha: float, max_len: int = 1000) -> str | None:
        """The complete string with belief >= alpha, if one exists."""
        best: tuple[float, str] | None = None
        stack = [""]
        while stack:
            prefix = stack.pop()
            if len(prefix) > max_len:
                continue
            for c in self.alphabet:
                child = prefix + c
                b = self.belief(child)
                if b < alpha:
                    continue
                if c == STOP:
                    if best is None or b > best[0]:
                        best = (b, child)
                else:
                    stack.append(child)
        return best[1] if best else None


@dataclass(frozen=True)
class SessionConfig:
    n_leafs: int = 10
    alpha: float = 0.95
    mode: str = "multi"

    def __post_init__(self):
        if self.n_leafs < 2:
            raise ValueError(f"n_leafs must be >= 2, got {self.n_leafs}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class Query:
    trial_index: int
    tree: FiniteQueryTree
    coding: CodingFunction
    root_prefix: str
    h_m_bits: float
    expected_information_bits: float
    x_hat: int | None = None
    surprise_bits: float | None = None
    timestamp: float = field(default_factory=time.time)


class Session:
    """One user's typing session: build query, absorb response, decide.

    Strictly serialized: build_query must be answered by update before the
    next query is built.  The language model and channel are shared,
    immutable inputs.
    """

    def __init__(
        self,
        lm,
        channel: ConfusionMatrix,
        config: SessionConfig | None = None,
        channel_capacity: ChannelCapacity | None = None,
    ):
        self.config = config if config is not None else SessionConfig()
        self.lm = lm
        self.channel = channel
        if self.config.mode == "monotonic" and channel.symbol_angles is None:
            self.channel = channel.with_angles()
        self.capacity = channel_capacity if channel_capacity is not None else capacity(self.channel, tol=1e-9)
        self.posterior = Posterior(lm)
        self.alphabet = self.posterior.alphabet
        self.decided_text: str = ""
        self.history: list[Query] = []
        self.outstanding: Query | None = None

    @property
    def decided(self) -> bool:
        return bool(self.decided_text)

    # -- query construction ------------------------------------------------

    def build_query(self) -> Query:
        if self.decided:
            raise RuntimeError("session already decided; no further queries")
        if self.outstanding is not None:
            raise RuntimeError("a query is already outstanding")
        cfg = self.config
        root_prefix = advance_root(self.posterior.belief, self.alphabet, cfg.alpha)
        root_mass = self.posterior.belief(root_prefix)
        max_depth = 1 if cfg.mode == "single" else None
        tree = select_tree(
            self.posterior.next_char_dist,
            root_prefix,
            root_mass,
            cfg.n_leafs,
            self.alphabet,
            max_depth=max_depth,
        )
        masses = np.array([leaf.mass for leaf in tree.leafs])
        total = masses.sum()
        if total > 0:
            masses = masses / total
        if cfg.mode == "monotonic":
            coding = monotonic_code(masses, self.channel, q=self.capacity.optimal_prior)
        else:
            coding = waterfill(masses, self.capacity.optimal_prior, self.channel)
        query = Query(
            trial_index=len(self.history),
            tree=tree,
            coding=coding,
            root_prefix=root_prefix,
            h_m_bits=entropy_bits(masses),
            expected_information_bits=coding.expected_information_bits,
        )
        self.outstanding = query
        return query

    # -- evidence ----------------------------------------------------------

    def update(self, x_hat: int) -> Posterior:
        """Bayes update: scale each leaf region by its response likelihood."""
        query = self.outstanding
        if query is None:
            raise RuntimeError("no outstanding query")
        if not 0 <= x_hat < self.channel.n_symbols:
            raise ValueError(f"symbol index {x_hat} out of range")
        leafs = query.tree.leafs
        liks = np.array(
            [self.channel.probs[int(query.coding.assignment[i]), x_hat] for i in range(len(leafs))]
        )
        masses = np.array([leaf.mass for leaf in leafs])
        p_obs = float(liks @ masses) / max(float(masses.sum()), 1e-300)
        if p_obs <= 0.0:
            raise RuntimeError("observed response has zero probability under the model")
        for leaf, lik in zip(leafs, liks):
            factor = float(lik) / p_obs
            if leaf.kind == GOBACK:
                self.posterior.multiply_goback_region(query.root_prefix, factor)
            elif leaf.kind == WILDCARD:
                for prefix in leaf.covered:
                    self.posterior.multiply_region(prefix, factor)
            else:
                self.posterior.multiply_region(leaf.prefix, factor)
        query.x_hat = x_hat
        query.surprise_bits = -math.log2(p_obs)
        self.history.append(query)
        self.outstanding = None
        self.check_decision()
        return self.posterior

    def check_decision(self) -> str | None:
        """Decide when a complete string's belief reaches alpha."""
        if self.decided:
            return self.decided_text
        decided = self.posterior.map_decision(self.config.alpha)
        if decided is not None:
            self.decided_text = decided
        return decided

    # -- simulated user ----------------------------------------------------

    def target_symbol(self, target: str) -> int:
        """The symbol an ideal user produces for `target` under the
        outstanding query (sampled through the channel by the caller)."""
        if self.outstanding is None:
            raise RuntimeError("no outstanding query")
        leafs = self.outstanding.tree.leafs
        leaf = self.outstanding.tree.map_string(target)
        return int(self.outstanding.coding.assignment[leafs.index(leaf)])

    # -- event log ---------------------------------------------------------

    def event_records(self, top_k: int = 10) -> list[dict]:
        records = []
        prev_tree = None
        for query in self.history:
            records.append(
                {
                    "trial_index": query.trial_index,
                    "root_prefix": query.root_prefix,
                    "leafs": leaf_records(
                        query.tree,
                        query.coding.assignment,
                        self.channel.symbol_angles,
                        prev_tree,
                    ),
                    "x_hat": query.x_hat,
                    "h_m_bits": query.h_m_bits,
                    "expected_information_bits": query.expected_information_bits,
                    "surprise_bits": query.surprise_bits,
                }
            )
            prev_tree = query.tree
        if records:
            records[-1]["top_beliefs"] = self.top_beliefs(top_k)
        return records

    def top_beliefs(self, k: int = 10) -> list[tuple[str, float]]:
        """The k highest-belief prefixes one character past the current root."""
        root = advance_root(self.posterior.belief, self.alphabet, self.config.alpha)
        scored = [
            (root + c, self.posterior.belief(root + c))
            for c in self.alphabet
        ]
        scored.sort(key=lambda t: (-t[1], t[0]))
        return scored[:k]

    def write_event_log(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for record in self.event_records():
                fh.write(json.dumps(record, sort_keys=True) + "\n")
