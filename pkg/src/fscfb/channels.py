"""Finite-state channels: representation, validation, and structural checks.

A general channel is the joint law P(y, s_next | x, s_prev) over finite
alphabets, stored as a dense (S, X, Y, S) table. A unifilar channel is the
pair (W, f): a per-state output law W(y | x, s_prev) plus a deterministic
next-state table f(s_prev, x, y).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, ShapeError, ValidationError

ROW_SUM_TOL = 1e-12       # stochasticity tolerance at validation time
COMPOSED_SUM_TOL = 1e-10  # after n-fold composition (accumulated error)
INDECOMP_BUDGET = 10**7   # |X|^n * |S|^2 entries an exhaustive sweep may touch


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


def _check_rows(rows: np.ndarray, what: str) -> None:
    bad = np.argwhere(np.abs(rows - 1.0) > ROW_SUM_TOL)
    if bad.size:
        s, x = bad[0]
        raise ValidationError(
            f"{what} row (s_prev={s}, x={x}) sums to {rows[s, x]:.17g}, expected 1"
        )


def _check_range(table: np.ndarray, what: str) -> None:
    bad = np.argwhere((table < 0.0) | (table > 1.0))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise ValidationError(f"{what} entry {idx} = {table[tuple(bad[0])]:.17g} outside [0, 1]")


@dataclass(frozen=True)
class FiniteStateChannel:
    """P(y, s_next | x, s_prev) as a (S, X, Y, S) table; immutable once built."""

    law: np.ndarray

    def __post_init__(self):
        law = np.asarray(self.law, dtype=float)
        if law.ndim != 4 or law.shape[0] != law.shape[3]:
            raise ShapeError(f"law must have shape (S, X, Y, S), got {law.shape}")
        if min(law.shape[:3]) < 1:
            raise ValidationError("alphabet sizes must be >= 1")
        _check_range(law, "law")
        _check_rows(law.sum(axis=(2, 3)), "law")
        object.__setattr__(self, "law", _frozen(law))

    @property
    def s_size(self) -> int:
        return self.law.shape[0]

    @property
    def x_size(self) -> int:
        return self.law.shape[1]

    @property
    def y_size(self) -> int:
        return self.law.shape[2]


@dataclass(frozen=True)
class UnifilarChannel:
    """Pair (W, f): per-state output law plus deterministic next-state table.

    ``w[s_prev, x, y]`` is the output probability, ``f[s_prev, x, y]`` the
    next state. Both tables are indexed the same way and frozen after
    validation.
    """

    w: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        f = np.asarray(self.f)
        if w.ndim != 3:
            raise ShapeError(f"w must have shape (S, X, Y), got {w.shape}")
        if f.shape != w.shape:
            raise ShapeError(f"f shape {f.shape} must match w shape {w.shape}")
        if not np.issubdtype(f.dtype, np.integer):
            if not np.all(f == np.floor(f)):
                raise ValidationError("f must contain integer state indices")
            f = f.astype(np.int64)
        s_size = w.shape[0]
        if np.any(f < 0) or np.any(f >= s_size):
            bad = np.argwhere((f < 0) | (f >= s_size))[0]
            raise ValidationError(
                f"f entry {tuple(int(i) for i in bad)} = {f[tuple(bad)]} outside 0..{s_size - 1}"
            )
        _check_range(w, "w")
        _check_rows(w.sum(axis=2), "w")
        object.__setattr__(self, "w", _frozen(w))
        object.__setattr__(self, "f", _frozen(f))

    @property
    def s_size(self) -> int:
        return self.w.shape[0]

    @property
    def x_size(self) -> int:
        return self.w.shape[1]

    @property
    def y_size(self) -> int:
        return self.w.shape[2]


@dataclass(frozen=True)
class StateBeliefTable:
    """q(s_n | x^n, s_0): distribution over the final state for one input path."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ShapeError("state belief must be a vector over states")
        if abs(values.sum() - 1.0) > ROW_SUM_TOL:
            raise ValidationError(f"state belief sums to {values.sum():.17g}, expected 1")
        object.__setattr__(self, "values", _frozen(values))


@dataclass(frozen=True)
class ConnectivityReport:
    """Verdict of the strong-connectivity check on the support graph.

    ``witness`` is an unreachable (from_state, to_state) pair when the
    verdict is negative; ``max_hops`` is the largest shortest-path length
    over all ordered state pairs when it is positive (path lengths are not
    certified minimal in the multi-step input sense).
    """

    connected: bool
    witness: tuple[int, int] | None = None
    max_hops: int | None = None

    def __bool__(self) -> bool:
        return self.connected


def compose_unifilar(u: UnifilarChannel) -> FiniteStateChannel:
    """Expand (W, f) into the joint law: mass W(y|x,s') on s = f(s',x,y), else 0."""
    s_size, x_size, y_size = u.w.shape
    law = np.zeros((s_size, x_size, y_size, s_size))
    sp, x, y = np.indices((s_size, x_size, y_size))
    law[sp, x, y, u.f] = u.w
    return FiniteStateChannel(law)


def _check_symbols(c: FiniteStateChannel, x_seq, s0: int) -> list[int]:
    xs = [int(x) for x in x_seq]
    for x in xs:
        if not 0 <= x < c.x_size:
            raise IndexError(f"input symbol {x} outside 0..{c.x_size - 1}")
    if not 0 <= s0 < c.s_size:
        raise IndexError(f"state {s0} outside 0..{c.s_size - 1}")
    return xs


def n_fold_law(c: FiniteStateChannel, x_seq, s0: int, n: int) -> np.ndarray:
    """Joint P^n(y^n, s_n | x^n, s_0) as a (Y, ..., Y, S) table with n output axes.

    Built by the forward recursion that sums the one-step law over the
    intermediate state: P^n = sum_{s_{n-1}} P(y_n, s_n | x_n, s_{n-1}) P^{n-1}.
    """
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    xs = _check_symbols(c, x_seq, s0)
    if len(xs) != n:
        raise ShapeError(f"x_seq has length {len(xs)}, expected n = {n}")
    table = c.law[s0, xs[0]]  # (Y, S)
    for x in xs[1:]:
        # contract the trailing state axis with the next step's s_prev axis
        table = np.tensordot(table, c.law[:, x], axes=(table.ndim - 1, 0))
    total = table.sum()
    if abs(total - 1.0) > COMPOSED_SUM_TOL:
        raise ValidationError(f"n-fold law sums to {total:.17g}; accumulated error too large")
    return table


def state_marginal(c: FiniteStateChannel, x_seq, s0: int, n: int) -> StateBeliefTable:
    """q^n(s_n | x^n, s_0): the n-fold law summed over all output sequences."""
    if n == 0:
        values = np.zeros(c.s_size)
        if not 0 <= s0 < c.s_size:
            raise IndexError(f"state {s0} outside 0..{c.s_size - 1}")
        values[s0] = 1.0
        return StateBeliefTable(values)
    table = n_fold_law(c, x_seq, s0, n)
    return StateBeliefTable(table.sum(axis=tuple(range(table.ndim - 1))))


def indecomposability_gap(c: FiniteStateChannel, n: int, budget: int = INDECOMP_BUDGET) -> float:
    """Worst-case initial-state memory after n steps.

    Returns max over (s_n, x^n, s_0, s_0') of |q^n(s_n|x^n,s_0) - q^n(s_n|x^n,s_0')|,
    sweeping every input sequence exhaustively. Refuses horizons whose sweep
    would touch more than ``budget`` table entries.
    """
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    cost = (c.x_size**n) * c.s_size * c.s_size
    if cost > budget:
        raise ResourceLimitError(
            f"exhaustive sweep needs {cost} entries, over the budget of {budget}",
            limit=budget,
        )
    # t[s_prev, x, s_next]: one-step state kernel with outputs summed out
    t = c.law.sum(axis=2)
    gap = 0.0
    for x_seq in itertools.product(range(c.x_size), repeat=n):
        q = np.eye(c.s_size)  # rows: conditional state law per initial state
        for x in x_seq:
            q = q @ t[:, x, :]
        gap = max(gap, float(np.abs(q[:, None, :] - q[None, :, :]).max()))
    return gap


def strongly_connected(c: FiniteStateChannel) -> ConnectivityReport:
    """Decide whether every state reaches every state with positive probability.

    Uses the support graph with an edge s' -> s iff some (x, y) has
    law(s', x, y, s) > 0; reachability there coincides with reachability
    under some input distribution. Reaching is counted over >= 1 steps.
    """
    s_size = c.s_size
    adj = (c.law > 0).any(axis=(1, 2))
    dist = np.full((s_size, s_size), -1, dtype=int)
    for src in range(s_size):
        queue = deque(int(t) for t in np.flatnonzero(adj[src]))
        for t in queue:
            dist[src, t] = 1
        while queue:
            node = queue.popleft()
            for t in np.flatnonzero(adj[node]):
                if dist[src, t] < 0:
                    dist[src, t] = dist[src, node] + 1
                    queue.append(int(t))
    for tgt in range(s_size):
        for src in range(s_size):
            if dist[src, tgt] < 0:
                return ConnectivityReport(connected=False, witness=(src, tgt))
    return ConnectivityReport(connected=True, max_hops=int(dist.max()))


def tv_distance(a: FiniteStateChannel, b: FiniteStateChannel) -> float:
    """Channel distance: max over (s_prev, x) of the L1 gap between joint rows."""
    if a.law.shape != b.law.shape:
        raise ShapeError(f"channel shapes differ: {a.law.shape} vs {b.law.shape}")
    return float(np.abs(a.law - b.law).sum(axis=(2, 3)).max())
