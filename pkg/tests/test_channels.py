import itertools

import numpy as np
import pytest

from fscfb import (
    FiniteStateChannel,
    ResourceLimitError,
    ShapeError,
    StateBeliefTable,
    UnifilarChannel,
    ValidationError,
    compose_unifilar,
    indecomposability_gap,
    mixing_pair,
    n_fold_law,
    noiseless_z_pair,
    state_marginal,
    strongly_connected,
    tv_distance,
)
from conftest import brute_nfold, rand_fsc


EPS = 0.25


def test_unifilar_validation_names_bad_row():
    w = np.full((2, 2, 2), 0.5)
    w[1, 0] = [0.6, 0.3]  # sums to 0.9
    f = np.zeros((2, 2, 2), dtype=int)
    with pytest.raises(ValidationError, match=r"s_prev=1, x=0"):
        UnifilarChannel(w, f)


def test_unifilar_validation_rejects_bad_states():
    w = np.full((2, 2, 2), 0.5)
    f = np.zeros((2, 2, 2), dtype=int)
    f[0, 1, 1] = 2
    with pytest.raises(ValidationError, match="outside"):
        UnifilarChannel(w, f)


def test_fsc_validation():
    law = np.zeros((2, 2, 2, 2))
    law[:, :, 0, 0] = 1.0
    c = FiniteStateChannel(law)
    assert (c.s_size, c.x_size, c.y_size) == (2, 2, 2)
    with pytest.raises(ShapeError):
        FiniteStateChannel(np.ones((2, 2, 2)))
    law[0, 0, 0, 0] = 0.5
    with pytest.raises(ValidationError, match=r"s_prev=0, x=0"):
        FiniteStateChannel(law)


def test_channels_are_immutable():
    g = noiseless_z_pair(EPS)
    with pytest.raises(ValueError):
        g.channel.w[0, 0, 0] = 0.3
    with pytest.raises(ValueError):
        compose_unifilar(g.channel).law[0, 0, 0, 0] = 0.3


def test_compose_unifilar_entries():
    u = noiseless_z_pair(EPS).channel
    law = compose_unifilar(u).law
    assert law[0, 0, 0, 0] == 1.0  # noiseless state keeps itself on (0, 0)
    assert law[1, 0, 1, 1] == EPS  # Z-state flip lands where f says
    # indicator structure: anything off f's target is zero
    for sp, x, y in itertools.product(range(2), repeat=3):
        target = u.f[sp, x, y]
        for s in range(2):
            if s != target:
                assert law[sp, x, y, s] == 0.0


def test_compose_rows_inherit_stochasticity(rng):
    for _ in range(20):
        w = rng.random((3, 2, 2))
        w /= w.sum(axis=2, keepdims=True)
        f = rng.integers(0, 3, size=(3, 2, 2))
        u = UnifilarChannel(w, f)
        law = compose_unifilar(u).law
        # composing only relocates mass, so the row sums match bit for bit
        assert np.array_equal(law.sum(axis=(2, 3)), u.w.sum(axis=2))


def test_n_fold_law_base_case():
    c = compose_unifilar(mixing_pair(EPS, 0.25).channel)
    table = n_fold_law(c, [1], 0, 1)
    assert np.array_equal(table, c.law[0, 1])


def test_n_fold_law_noiseless_path():
    c = compose_unifilar(noiseless_z_pair(EPS).channel)
    table = n_fold_law(c, [0, 1], 0, 2)
    assert table[0, 1, 0] == 1.0
    assert table.sum() == pytest.approx(1.0, abs=1e-12)


def test_n_fold_law_matches_path_enumeration():
    c = compose_unifilar(mixing_pair(EPS, 0.25).channel)
    table = n_fold_law(c, [0, 1], 1, 2)
    brute = brute_nfold(c.law, [0, 1], 1)
    for ys_s, p in brute.items():
        assert table[ys_s] == pytest.approx(p, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_n_fold_recursion_on_random_channels(rng, n):
    for _ in range(5):
        c = rand_fsc(rng)
        xs = rng.integers(0, 2, size=n).tolist()
        s0 = int(rng.integers(0, 2))
        table = n_fold_law(c, xs, s0, n)
        brute = brute_nfold(c.law, xs, s0)
        for key, p in brute.items():
            assert table[key] == pytest.approx(p, abs=1e-13)


def test_n_fold_law_rejects_bad_symbols():
    c = compose_unifilar(noiseless_z_pair(EPS).channel)
    with pytest.raises(IndexError):
        n_fold_law(c, [0, 2], 0, 2)
    with pytest.raises(IndexError):
        n_fold_law(c, [0, 0], 5, 2)
    with pytest.raises(ShapeError):
        n_fold_law(c, [0], 0, 2)


def test_state_marginal():
    c = compose_unifilar(noiseless_z_pair(EPS).channel)
    assert state_marginal(c, [0, 1, 0], 0, 3).values.tolist() == [1.0, 0.0]
    # zero-horizon edge: point mass on the initial state
    assert state_marginal(c, [], 1, 0).values.tolist() == [0.0, 1.0]


def test_state_marginal_matches_path_enumeration():
    c = compose_unifilar(mixing_pair(EPS, 0.25).channel)
    got = state_marginal(c, [0, 0, 0], 1, 3).values
    brute = brute_nfold(c.law, [0, 0, 0], 1)
    expect = np.zeros(2)
    for (y1, y2, y3, s), p in brute.items():
        expect[s] += p
    assert np.allclose(got, expect, atol=1e-14)


def test_state_belief_validation():
    with pytest.raises(ValidationError):
        StateBeliefTable(np.array([0.5, 0.4]))


def test_indecomposability_gap_single_state():
    law = np.zeros((1, 2, 2, 1))
    law[:, :, 0, 0] = 0.25
    law[:, :, 1, 0] = 0.75
    c = FiniteStateChannel(law)
    for n in (1, 3, 5):
        assert indecomposability_gap(c, n) == 0.0


def test_indecomposability_gap_frozen_states():
    c = compose_unifilar(noiseless_z_pair(EPS).channel)
    for n in (1, 4, 8):
        assert indecomposability_gap(c, n) == 1.0  # states never mix


def test_indecomposability_gap_decays_when_mixing():
    c = compose_unifilar(mixing_pair(EPS, 0.25).channel)
    assert indecomposability_gap(c, 8) < indecomposability_gap(c, 2)


def test_indecomposability_gap_range(rng):
    for _ in range(10):
        c = rand_fsc(rng, s_size=3)
        g = indecomposability_gap(c, 3)
        assert 0.0 <= g <= 2.0


def test_indecomposability_budget():
    c = compose_unifilar(noiseless_z_pair(EPS).channel)
    with pytest.raises(ResourceLimitError) as err:
        indecomposability_gap(c, 10, budget=100)
    assert err.value.limit == 100


def test_strongly_connected_verdicts():
    frozen = compose_unifilar(noiseless_z_pair(EPS).channel)
    rep = strongly_connected(frozen)
    assert not rep.connected and rep.witness == (1, 0)

    mixing = compose_unifilar(mixing_pair(EPS, 0.25).channel)
    rep = strongly_connected(mixing)
    assert rep.connected and rep.witness is None and rep.max_hops == 1

    law = np.zeros((1, 2, 2, 1))
    law[:, :, 0, 0] = 1.0
    assert strongly_connected(FiniteStateChannel(law)).connected


def test_strongly_connected_label_invariance(rng):
    for _ in range(20):
        c = rand_fsc(rng, s_size=3)
        base = strongly_connected(c).connected
        perm_x = rng.permutation(2)
        perm_y = rng.permutation(2)
        relabeled = FiniteStateChannel(c.law[:, perm_x][:, :, perm_y])
        assert strongly_connected(relabeled).connected == base


def test_tv_distance_identity_and_mismatch():
    a = compose_unifilar(noiseless_z_pair(EPS).channel)
    assert tv_distance(a, a) == 0.0
    law = np.zeros((1, 2, 2, 1))
    law[:, :, 0, 0] = 1.0
    with pytest.raises(ShapeError):
        tv_distance(a, FiniteStateChannel(law))


def test_tv_distance_is_a_metric(rng):
    chans = [rand_fsc(rng) for _ in range(6)]
    for a in chans:
        for b in chans:
            dab = tv_distance(a, b)
            assert dab == tv_distance(b, a)
            assert dab >= 0.0
            if a is b:
                assert dab == 0.0
    for a, b, c in itertools.permutations(chans[:4], 3):
        assert tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-15


def test_tv_distance_separates_distinct_channels(rng):
    a = rand_fsc(rng)
    law = a.law.copy()
    law[0, 0] = law[0, 0][::-1]  # swap two output rows
    b = FiniteStateChannel(law)
    if not np.array_equal(a.law, b.law):
        assert tv_distance(a, b) > 0.0
