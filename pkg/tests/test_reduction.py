from fractions import Fraction

import pytest

from fscfb import (
    CounterMachineOracle,
    DomainError,
    FixedHaltingOracle,
    NeverHaltingOracle,
    OptimizerSettings,
    OracleError,
    capacity_gap,
    lambda_double_sequence,
    mixing_pair,
    noiseless_z_pair,
    parse_program,
    run_bounded,
    threshold_stopper,
    z_channel_closed_form,
)

FAST = OptimizerSettings(restarts=2)

PARITY = """
# halts iff r0 is even
jz r0 6
dec r0
jz r0 5
dec r0
jmp 0
jmp 5        # odd inputs spin here forever
halt
"""


def test_lambda_sequence_halting_oracle():
    oracle = FixedHaltingOracle(3)
    values = [lambda_double_sequence(oracle, 1, m) for m in range(1, 7)]
    assert values == [
        Fraction(1, 2),
        Fraction(1, 4),
        Fraction(1, 8),
        Fraction(1, 8),
        Fraction(1, 8),
        Fraction(1, 8),
    ]


def test_lambda_sequence_never_halting():
    values = [lambda_double_sequence(NeverHaltingOracle(), 5, m) for m in range(1, 6)]
    assert values == [Fraction(1, 2**m) for m in range(1, 6)]


def test_lambda_sequence_certificate(rng):
    for _ in range(25):
        step = None if rng.random() < 0.3 else int(rng.integers(1, 15))
        oracle = FixedHaltingOracle({7: step} if step else {})
        values = [lambda_double_sequence(oracle, 7, m) for m in range(1, 21)]
        for m in range(1, 20):
            assert values[m] <= values[m - 1]  # non-increasing in the budget
        for big_m in range(1, 21):
            bound = Fraction(1, 2**big_m)
            for m in range(big_m, 21):
                assert abs(values[m - 1] - values[big_m - 1]) < bound


def test_lambda_sequence_domain_and_failures():
    with pytest.raises(DomainError):
        lambda_double_sequence(FixedHaltingOracle(1), 0, 3)
    with pytest.raises(DomainError):
        lambda_double_sequence(FixedHaltingOracle(1), 1, 0)

    class Broken:
        def halted_within(self, n, m):
            raise RuntimeError("tape jam")

    with pytest.raises(OracleError, match="tape jam"):
        lambda_double_sequence(Broken(), 1, 3)


def test_threshold_stopper_cases():
    out = threshold_stopper(lambda n, m: Fraction(1), 4)
    assert out.halted and out.step == 1
    out = threshold_stopper(lambda n, m: Fraction(1, 2 ** (m + 1)), 4, budget=64)
    assert not out.halted and out.budget == 64
    gap = 1 - z_channel_closed_form(0.25)[0]
    out = threshold_stopper(lambda n, m: gap, 4)
    assert out.halted and out.step == 2
    with pytest.raises(DomainError):
        threshold_stopper(lambda n, m: 0, 4, budget=0)


def test_threshold_stopper_halts_iff_positive(rng):
    for _ in range(50):
        mu = rng.choice([0.0, -0.25, float(rng.uniform(0.01, 1.0))])
        seq = lambda n, m, mu=mu: mu + (-1) ** m * Fraction(1, 2 ** (m + 1))
        out = threshold_stopper(seq, 1, budget=64)
        assert out.halted == (mu > 0)


def test_counter_machine_parse_errors():
    with pytest.raises(OracleError):
        parse_program("bump r0")
    with pytest.raises(OracleError):
        parse_program("jz r0 9")
    with pytest.raises(OracleError):
        parse_program("inc x3")
    with pytest.raises(OracleError):
        parse_program("halt now")


def test_counter_machine_parity_program():
    prog = parse_program(PARITY)
    assert run_bounded(prog, 0, 10) is not None
    assert run_bounded(prog, 4, 50) is not None
    assert run_bounded(prog, 3, 5000) is None
    # empty programs halt immediately
    assert run_bounded(parse_program("# nothing"), 9, 1) == 0


def test_counter_machine_oracle_monotone():
    oracle = CounterMachineOracle(PARITY)
    halted_at = next(m for m in range(1, 100) if oracle.halted_within(6, m))
    for m in range(1, 40):
        assert oracle.halted_within(6, m) == (m >= halted_at)
    assert not any(oracle.halted_within(7, m) for m in range(1, 60))


def test_counter_machine_feeds_lambda_sequence():
    oracle = CounterMachineOracle(PARITY)
    lam_even = lambda_double_sequence(oracle, 2, 40)
    lam_odd = lambda_double_sequence(oracle, 3, 40)
    assert lam_even > Fraction(1, 2**40)  # halted: frozen dyadic value
    assert lam_odd == Fraction(1, 2**40)  # still running: keeps shrinking


def test_capacity_gap_zero_for_same_state():
    u = mixing_pair("1/4", "1/4").channel
    assert capacity_gap(u, 1, 1, 2, FAST) == 0.0


def test_capacity_gap_frozen_family():
    u = noiseless_z_pair("1/4").channel
    gap = capacity_gap(u, 0, 1, 2, FAST)
    expect = 1.0 - z_channel_closed_form(0.25)[0]
    assert gap == pytest.approx(expect, abs=1e-5)
    # order of the states fixes the sign
    assert capacity_gap(u, 1, 0, 2, FAST) == pytest.approx(-expect, abs=1e-5)


def test_capacity_gap_small_when_mixing():
    u = mixing_pair("1/4", "1/4").channel
    assert abs(capacity_gap(u, 0, 1, 4, FAST)) < 0.05
