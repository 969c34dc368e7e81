"""Channel gallery: the two-state noiseless/Z switch family and its extensions.

All constructors build their tables in exact rational arithmetic first and
keep those alongside the float channel, so files can echo the defining
fractions verbatim.

The shared next-state table routes (0,0) and (1,1) from state 0 back to 0
and the mismatched pairs to 1, while state 1 absorbs everything except
(1,0), which returns to 0:

    f[s'][x][y]     y=0  y=1
    s'=0, x=0        0    1
    s'=0, x=1        1    0
    s'=1, x=0        1    1
    s'=1, x=1        0    1
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channels import UnifilarChannel
from .errors import DomainError
from .rational import as_fraction, float_table

_HALF = Fraction(1, 2)

# f[s'][x][y] for the two-state family
BASE_F = ((0, 1), (1, 0)), ((1, 1), (0, 1))


@dataclass(frozen=True)
class GalleryChannel:
    """A constructed channel plus the exact tables and parameters behind it."""

    channel: UnifilarChannel
    label: str
    params: dict
    exact_w: tuple

    @property
    def x_size(self) -> int:
        return self.channel.x_size

    @property
    def y_size(self) -> int:
        return self.channel.y_size

    @property
    def s_size(self) -> int:
        return self.channel.s_size


def _freeze(nested):
    if isinstance(nested, (list, tuple)):
        return tuple(_freeze(v) for v in nested)
    return nested


def _make(exact_w, f, label, params) -> GalleryChannel:
    exact_w = _freeze(exact_w)
    channel = UnifilarChannel(np.array(float_table(list(exact_w))), np.array(f))
    return GalleryChannel(channel=channel, label=label, params=dict(params), exact_w=exact_w)


def _switch_pair(eps: Fraction, mix: Fraction, label: str, params: dict) -> GalleryChannel:
    one = Fraction(1)
    w = [
        [[one - mix, mix], [mix, one - mix]],
        [[one - eps, eps], [mix, one - mix]],
    ]
    return _make(w, BASE_F, label, params)


def noiseless_z_pair(eps) -> GalleryChannel:
    """Two states: an identity channel and a Z-channel with flip probability eps.

    With the shared next-state table each state is absorbing on its own
    support, so the initial state is never forgotten.
    """
    eps = as_fraction(eps)
    if not 0 < eps < _HALF:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    one = Fraction(1)
    zero = Fraction(0)
    w = [
        [[one, zero], [zero, one]],
        [[one - eps, eps], [zero, one]],
    ]
    return _make(w, BASE_F, "noiseless-z", {"eps": eps})


def mixing_pair(eps, mix) -> GalleryChannel:
    """The switch family with symmetric noise ``mix`` stirring the two states.

    mix = 0 degenerates to the noiseless/Z pair; any mix > 0 makes the
    channel strongly connected.
    """
    eps = as_fraction(eps)
    mix = as_fraction(mix)
    if not 0 < eps < _HALF:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    if not 0 <= mix <= _HALF:
        raise DomainError(f"mix must lie in [0, 1/2], got {mix}")
    return _switch_pair(eps, mix, "mixing", {"eps": eps, "mix": mix})


def inverse_k_pair(eps, k: int) -> GalleryChannel:
    """The mixing channel at mix = 1/k; distance 2/k from the noiseless/Z pair."""
    eps = as_fraction(eps)
    if not 0 < eps < _HALF:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    k = int(k)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return _switch_pair(eps, Fraction(1, k), "inverse-k", {"eps": eps, "k": k})


def extend_alphabets(g: GalleryChannel, x_size: int, y_size: int) -> GalleryChannel:
    """Grow the input/output alphabets with inert symbols.

    New output symbols never occur (probability zero under every input) and
    new input symbols replay input 0's output law; every pair involving a
    new symbol freezes the state. No policy can extract anything from the
    added symbols, so rates and the support graph's verdicts are unchanged.
    """
    x_size, y_size = int(x_size), int(y_size)
    if x_size < g.x_size or y_size < g.y_size:
        raise DomainError(
            f"alphabets can only grow: have ({g.x_size}, {g.y_size}), "
            f"asked for ({x_size}, {y_size})"
        )
    zero = Fraction(0)
    old_x, old_y, s_size = g.x_size, g.y_size, g.s_size
    w = [
        [[zero] * y_size for _ in range(x_size)]
        for _ in range(s_size)
    ]
    f = [[[sp] * y_size for _ in range(x_size)] for sp in range(s_size)]
    for sp in range(s_size):
        for x in range(x_size):
            src = x if x < old_x else 0
            for y in range(old_y):
                w[sp][x][y] = g.exact_w[sp][src][y]
            if x < old_x:
                for y in range(old_y):
                    f[sp][x][y] = int(g.channel.f[sp, x, y])
            # pairs with a new input or a new output keep f = s'
    params = dict(g.params)
    params.update({"x_size": x_size, "y_size": y_size})
    return _make(w, f, g.label, params)


def extend_states(g: GalleryChannel, s_size: int) -> GalleryChannel:
    """Append states 2..s_size-1 as increasingly noisy Z-channels.

    State s >= 2 flips input 0 with probability delta_s = eps + (1/2 - eps)^(s-1),
    strictly noisier than state 1 and at most 1/2. The next-state table
    chains the new states: state 0's (0,1) pair now enters state 2,
    intermediate states advance on (0,1) and fall back to 0 on any other
    supported pair, zero-probability pairs freeze, and the last state sends
    every supported pair back to 0.
    """
    s_size = int(s_size)
    if s_size < 2:
        raise DomainError(f"state count must be >= 2, got {s_size}")
    if g.s_size != 2:
        raise DomainError("state extension starts from the two-state family")
    eps = g.params.get("eps")
    if eps is None:
        raise DomainError("base channel does not record its eps parameter")
    eps = as_fraction(eps)
    if s_size == 2:
        return g

    x_size, y_size = g.x_size, g.y_size
    zero, one = Fraction(0), Fraction(1)
    w = [[list(row) for row in state] for state in g.exact_w]
    f = [[[int(v) for v in row] for row in state] for state in np.asarray(g.channel.f)]
    # state 0's (x, y) = (0, 1) pair now opens the chain of new states
    f[0][0][1] = 2

    for s in range(2, s_size):
        delta = eps + (_HALF - eps) ** (s - 1)
        w_s = [[zero] * y_size for _ in range(x_size)]
        w_s[0][0] = one - delta
        w_s[0][1] = delta
        w_s[1][1] = one
        for x in range(2, x_size):
            w_s[x] = list(w_s[0])  # inert extra inputs replay input 0
        last = s == s_size - 1
        f_s = [[s] * y_size for _ in range(x_size)]
        for x in range(2):
            for y in range(y_size):
                if w_s[x][y] == 0:
                    continue  # unsupported pairs freeze in place
                if not last and (x, y) == (0, 1):
                    f_s[x][y] = s + 1
                else:
                    f_s[x][y] = 0
        # pairs with inert extra inputs freeze, like the alphabet extension
        w.append(w_s)
        f.append(f_s)

    params = dict(g.params)
    params["s_size"] = s_size
    return _make(w, f, g.label, params)


def state_noise(eps, s: int) -> Fraction:
    """delta_s = eps + (1/2 - eps)^(s-1) for appended states s >= 2."""
    eps = as_fraction(eps)
    if s < 2:
        raise DomainError(f"appended states start at 2, got {s}")
    return eps + (_HALF - eps) ** (s - 1)
