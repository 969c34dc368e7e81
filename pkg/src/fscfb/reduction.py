"""Step-bounded oracles and the effective-sequence scaffolding built on them.

An oracle is any object answering ``halted_within(n, m)``: has the
underlying program halted on input n within m steps? Answers must be
deterministic and monotone in m. A genuinely non-recursive halting set
cannot be constructed, so mocks and a small counter-machine interpreter
stand in for it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .capacity import OptimizerSettings, optimize_rate
from .channels import UnifilarChannel
from .errors import DomainError, OracleError


class FixedHaltingOracle:
    """Mock oracle with prescribed halting steps.

    ``times`` may be a dict (missing inputs never halt), a single int used
    for every input, or a callable returning a step or None.
    """

    def __init__(self, times):
        if isinstance(times, dict):
            self._lookup = lambda n: times.get(n)
        elif isinstance(times, int):
            self._lookup = lambda n: times
        elif callable(times):
            self._lookup = times
        else:
            raise DomainError("times must be a dict, an int, or a callable")

    def halted_within(self, n: int, m: int) -> bool:
        step = self._lookup(n)
        return step is not None and step <= m


class NeverHaltingOracle:
    def halted_within(self, n: int, m: int) -> bool:
        return False


# --- minimal counter-machine programs ------------------------------------
#
# One instruction per line; '#' starts a comment. Registers are r0, r1, ...
# with r0 holding the input and the rest starting at 0. Targets are 0-based
# instruction indices. Executing an instruction costs one step; `halt` or
# running past the last instruction stops the machine.
#
#   inc rK        add one to rK
#   dec rK        subtract one from rK (floors at 0)
#   jz rK T       jump to T when rK == 0
#   jmp T         jump to T
#   halt          stop

def parse_program(text: str) -> tuple:
    lines = []
    for raw in text.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append(stripped.lower().split())
    program = []
    for idx, tokens in enumerate(lines):
        op = tokens[0]
        try:
            if op == "halt":
                if len(tokens) != 1:
                    raise ValueError("halt takes no operands")
                program.append(("halt",))
            elif op in ("inc", "dec"):
                program.append((op, _reg(tokens[1])))
            elif op == "jz":
                program.append(("jz", _reg(tokens[1]), int(tokens[2])))
            elif op == "jmp":
                program.append(("jmp", int(tokens[1])))
            else:
                raise ValueError(f"unknown instruction {op!r}")
        except (IndexError, ValueError) as exc:
            raise OracleError(f"bad instruction at line {idx}: {' '.join(tokens)}") from exc
    for idx, ins in enumerate(program):
        target = ins[2] if ins[0] == "jz" else ins[1] if ins[0] == "jmp" else None
        if target is not None and not 0 <= target < len(program):
            raise OracleError(f"jump target {target} out of range at line {idx}")
    return tuple(program)


def _reg(token: str) -> int:
    if not token.startswith("r") or not token[1:].isdigit():
        raise ValueError(f"bad register {token!r}")
    return int(token[1:])


def run_bounded(program, n: int, max_steps: int):
    """Execute up to max_steps instructions; return the halting step or None."""
    regs = {0: int(n)}
    pc = 0
    steps = 0
    while steps < max_steps:
        if pc >= len(program):
            return steps
        ins = program[pc]
        steps += 1
        op = ins[0]
        if op == "halt":
            return steps
        if op == "inc":
            regs[ins[1]] = regs.get(ins[1], 0) + 1
            pc += 1
        elif op == "dec":
            regs[ins[1]] = max(0, regs.get(ins[1], 0) - 1)
            pc += 1
        elif op == "jz":
            pc = ins[2] if regs.get(ins[1], 0) == 0 else pc + 1
        else:  # jmp
            pc = ins[1]
    if pc >= len(program):
        return steps
    return None


class CounterMachineOracle:
    def __init__(self, program):
        self.program = parse_program(program) if isinstance(program, str) else tuple(program)

    def halted_within(self, n: int, m: int) -> bool:
        return run_bounded(self.program, n, m) is not None


def lambda_double_sequence(oracle, n: int, m: int) -> Fraction:
    """Dyadic value 2^(-l) if the oracle halts on n within l <= m steps, else 2^(-m).

    Non-increasing in m for fixed n, and |value(m) - value(M)| < 2^(-M)
    whenever m >= M, so the sequence converges effectively.
    """
    if n < 1 or m < 1:
        raise DomainError(f"indices must be >= 1, got n={n}, m={m}")
    try:
        for step in range(1, m + 1):
            if oracle.halted_within(n, step):
                return Fraction(1, 2**step)
    except OracleError:
        raise
    except Exception as exc:
        raise OracleError(f"oracle query failed for n={n}: {exc}") from exc
    return Fraction(1, 2**m)


def effective_certificate(values) -> list:
    """Per-index effective-convergence check for a dyadic sequence.

    Entry M-1 (1-based M) is True when |values[m-1] - values[M-1]| < 2^(-M)
    for every m >= M in the given range.
    """
    values = list(values)
    out = []
    for big_m in range(1, len(values) + 1):
        bound = Fraction(1, 2**big_m)
        ref = values[big_m - 1]
        out.append(all(abs(v - ref) < bound for v in values[big_m - 1 :]))
    return out


@dataclass(frozen=True)
class StopperOutcome:
    """Either halted at ``step`` or exhausted the probe ``budget``.

    Exhaustion certifies nothing: the underlying limit may still be
    positive beyond the budget only if it is smaller than every probed
    threshold, and it may equally be zero or negative.
    """

    halted: bool
    step: int | None = None
    budget: int | None = None


def threshold_stopper(seq, n: int, budget: int = 64) -> StopperOutcome:
    """Probe nu(n, m) for m = 1, 2, ... and halt once nu(n, m) > 2^(-m).

    When |mu_n - nu(n, m)| < 2^(-m) for an underlying mu_n, this halts if
    and only if mu_n > 0; a budget converts never-halting into an explicit
    exhausted outcome.
    """
    if budget < 1:
        raise DomainError(f"budget must be >= 1, got {budget}")
    for m in range(1, budget + 1):
        nu = seq(n, m)
        if nu > Fraction(1, 2**m):
            return StopperOutcome(halted=True, step=m)
    return StopperOutcome(halted=False, budget=budget)


def capacity_gap(
    u: UnifilarChannel,
    s_a: int,
    s_b: int,
    horizon: int,
    cfg: OptimizerSettings | None = None,
) -> float:
    """Finite-horizon estimate of the initial-state capacity difference.

    Returns optimize_rate(u, s_a) - optimize_rate(u, s_b) at the given
    horizon; the argument order fixes the sign.
    """
    a = optimize_rate(u, s_a, horizon, cfg)
    b = optimize_rate(u, s_b, horizon, cfg)
    return a.value - b.value
