"""Shared generators and brute-force oracles for the test suite.

The oracles here deliberately use plain dict/loop enumeration so they stay
independent of the vectorized implementations they check.
"""

import itertools

import numpy as np
import pytest

from fscfb import CausalPolicy, FiniteStateChannel, UnifilarChannel


def rand_fsc(rng, s_size=2, x_size=2, y_size=2):
    law = rng.random((s_size, x_size, y_size, s_size))
    law /= law.sum(axis=(2, 3), keepdims=True)
    return FiniteStateChannel(law)


def rand_unifilar(rng, s_size=2, x_size=2, y_size=2):
    w = rng.random((s_size, x_size, y_size))
    w /= w.sum(axis=2, keepdims=True)
    f = rng.integers(0, s_size, size=(s_size, x_size, y_size))
    return UnifilarChannel(w, f)


def rand_policy(rng, x_size, y_size, horizon):
    steps = []
    for n in range(1, horizon + 1):
        t = rng.random(((x_size * y_size) ** (n - 1), x_size))
        t /= t.sum(axis=1, keepdims=True)
        steps.append(t)
    return CausalPolicy(horizon, x_size, y_size, tuple(steps))


def brute_nfold(law, x_seq, s0):
    """P^n(y^n, s_n | x^n, s_0) by summing every (y^n, s^n) path explicitly."""
    y_size, s_size = law.shape[2], law.shape[0]
    n = len(x_seq)
    out = {}
    for ys in itertools.product(range(y_size), repeat=n):
        for states in itertools.product(range(s_size), repeat=n):
            p = 1.0
            prev = s0
            for x, y, s in zip(x_seq, ys, states):
                p *= law[prev, x, y, s]
                prev = s
            key = ys + (states[-1],)
            out[key] = out.get(key, 0.0) + p
    return out


def brute_directed_info(table, n_steps):
    """Conditional-MI sum by dictionary enumeration over all index tuples."""
    dims = table.shape
    total = 0.0
    for n in range(1, n_steps + 1):
        pxy, pxy_prev, py, py_prev = {}, {}, {}, {}
        for idx in itertools.product(*(range(d) for d in dims)):
            p = table[idx]
            if p == 0:
                continue
            xs = idx[:n]
            ys = idx[n_steps : n_steps + n]
            pxy[xs + ys] = pxy.get(xs + ys, 0.0) + p
            pxy_prev[xs + ys[:-1]] = pxy_prev.get(xs + ys[:-1], 0.0) + p
            py[ys] = py.get(ys, 0.0) + p
            py_prev[ys[:-1]] = py_prev.get(ys[:-1], 0.0) + p
        for key, p in pxy.items():
            xs, ys = key[:n], key[n:]
            total += p * np.log2(
                p * py_prev[ys[:-1]] / (pxy_prev[xs + ys[:-1]] * py[ys])
            )
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)
