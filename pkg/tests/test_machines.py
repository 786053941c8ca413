import random

import pytest

from proofkit import machines as rm
from proofkit.errors import CheckError, ParseError


def test_machine_validation():
    with pytest.raises(CheckError):
        rm.Machine(1, 1, 2, (rm.Command("prepend0", 1, 1, 2),))  # mu <= iota
    with pytest.raises(CheckError):
        rm.Machine(0, 1, 2, (rm.Command("prepend0", 5, 1, 2),))  # register range
    with pytest.raises(CheckError):
        rm.Machine(0, 1, 2, (rm.Command("case", 1, branches=(1, 2, 9)),))
    with pytest.raises(CheckError):
        rm.Machine(0, 1, 3, (rm.Command("prepend0", 1, 1, 2),))  # missing command


def test_step_semantics_store_commands():
    m = rm.Machine(1, 2, 2, (rm.Command("prepend0", 1, 2, 2),))
    c = rm.initial_configuration(m, ["1"])
    nxt = rm.step(m, c)
    assert nxt.registers == ("1", "01") and nxt.state == 2


def test_halt_state_is_fixed():
    m = rm.const0_machine()
    c = rm.Configuration(("1", "0"), 2)
    assert rm.step(m, c) == c
    assert rm.compiled_step(m, c) == c


def test_case_command_dispatch():
    m = rm.Machine(
        1,
        2,
        4,
        (
            rm.Command("case", 1, branches=(4, 2, 3)),
            rm.Command("prepend0", 2, 2, 4),
            rm.Command("prepend1", 2, 2, 4),
        ),
    )
    assert rm.run(m, [""]).output == ""  # empty input goes straight to halt
    assert rm.run(m, ["01"]).output == "0"
    assert rm.run(m, ["10"]).output == "1"


def test_run_const0_and_degenerate():
    m = rm.const0_machine()
    out = rm.run(m, ["11"])
    assert out.halted and out.output == "0" and out.steps == 1
    trivial = rm.Machine(0, 1, 1, ())
    out2 = rm.run(trivial, [])
    assert out2.halted and out2.output == "" and out2.steps == 0


def test_budget_exhaustion_is_an_outcome():
    loop = rm.Machine(0, 1, 2, (rm.Command("prepend0", 1, 1, 1),))
    out = rm.run(loop, [], budget=100)
    assert not out.halted and out.steps == 100


def test_case_function_table():
    assert rm.case_function("", "y", "z", "w") == "y"
    assert rm.case_function("01", "y", "z", "w") == "z"
    assert rm.case_function("10", "y", "z", "w") == "w"


def test_compiled_identity_at_halt_coordinate():
    m = rm.const0_machine()
    comp = rm.compile_g(m)
    c = rm.Configuration(("1", "11"), 2)
    assert rm.compiled_step(m, c, comp) == c


SAMPLES = [
    rm.const0_machine(),
    rm.Machine(
        1,
        2,
        4,
        (
            rm.Command("case", 1, branches=(4, 2, 3)),
            rm.Command("prepend0", 2, 2, 4),
            rm.Command("prepend1", 2, 2, 4),
        ),
    ),
    rm.Machine(
        0,
        2,
        3,
        (
            rm.Command("prepend1", 1, 2, 3),
            rm.Command("pred", 2, 1, 1),
        ),
    ),
]


@pytest.mark.parametrize("machine", SAMPLES)
def test_direct_and_compiled_agree_exhaustively(machine):
    compiled = rm.compile_g(machine)
    for c in rm.all_configurations(machine, 2):
        assert rm.step(machine, c) == rm.compiled_step(machine, c, compiled)


def test_halting_replay_through_compiled_mode():
    m = SAMPLES[1]
    direct = rm.run(m, ["10"], mode="direct")
    compiled = rm.run(m, ["10"], mode="compiled")
    assert direct.halted and compiled.halted
    assert direct.steps == compiled.steps and direct.output == compiled.output


# --- encoding and the complexity estimator ------------------------------------


def test_encoding_round_trip():
    for m in SAMPLES:
        m0 = rm.Machine(0, m.registers, m.states, m.commands)
        bits = rm.encode_machine(m0)
        assert rm.decode_machine(bits) == m0


def test_k_upper_bound_empty_string():
    got = rm.k_upper_bound("", len_cap=6, budget=20)
    assert got is not None
    assert got.machine.states == 1
    assert got.length == len(rm.encode_machine(rm.Machine(0, 1, 1, ()))) == 2


def test_k_upper_bound_monotone():
    small = rm.k_upper_bound("0", len_cap=8, budget=30)
    big_budget = rm.k_upper_bound("0", len_cap=8, budget=300)
    big_cap = rm.k_upper_bound("0", len_cap=12, budget=30)
    assert small is not None
    assert big_budget.length <= small.length
    assert big_cap.length <= small.length


def test_k_upper_bound_none_result():
    assert rm.k_upper_bound("0101", len_cap=3, budget=10) is None


# --- description files -----------------------------------------------------------


def test_parse_machine_file():
    text = """
# doubles nothing, just prepends
machine i=1 m=2 k=2
state 1 : prepend0 2 -> 2 goto 2
"""
    m = rm.parse_machine(text)
    assert rm.run(m, ["11"]).output == "0"


def test_parse_machine_case_syntax():
    text = """
machine i=1 m=2 k=4
state 1 : case 1 ? 4 2 3
state 2 : prepend0 2 -> 2 goto 4
state 3 : prepend1 2 -> 2 goto 4
"""
    m = rm.parse_machine(text)
    assert rm.run(m, ["0"]).output == "0"


def test_parse_machine_errors():
    with pytest.raises(ParseError):
        rm.parse_machine("state 1 : pred 1 -> 1 goto 1")
    with pytest.raises(ParseError):
        rm.parse_machine("machine i=0 m=1 k=2\n")
    with pytest.raises(ParseError):
        rm.parse_machine("machine i=0 m=1 k=1\nstate 1 : pred 1 -> 1 goto 1")
