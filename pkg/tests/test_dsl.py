import pytest

from gen_programs import mutate, random_program
from oracles import rng_for
from wgsim import ParseError, format_program, parse_scenario, run_scenario
from wgsim.dsl import AccessStmt, CheckerStmt, CsrwStmt, SpmpStmt, tokenize

MINIMAL = """\
platform {
  nworlds = 4;
  hart h0 { mwid=0; ext=[s,smwg,smwgd,sswg]; }
}
"""


def with_steps(*steps, platform=MINIMAL):
    return platform + "\n".join(steps) + "\n"


def error_of(text):
    with pytest.raises(ParseError) as info:
        parse_scenario(text)
    return info.value


def test_minimal_platform():
    p = parse_scenario(MINIMAL)
    assert len(p.platform.harts) == 1
    assert p.platform.harts[0].ext == ("s", "smwg", "smwgd", "sswg")
    assert p.steps == ()


def test_privilege_is_a_runtime_matter():
    p = parse_scenario(with_steps("on h0: mode U", "on h0: csrw mlwid 3 => violation"))
    assert isinstance(p.steps[1], CsrwStmt)
    report = run_scenario(p)
    assert report.passed
    assert report.steps[1].observed == "violation(Privilege)"


def test_malformed_access_kind_position():
    text = with_steps("on h0: access q 0x10 => allow")
    err = error_of(text)
    assert (err.line, err.column) == (5, 15)


def test_numeric_literals():
    p = parse_scenario(with_steps("on h0: access r 0x8000_0000 4 => allow",
                                  "on h0: csrw slwid 1_0"))
    assert p.steps[0].addr == 0x8000_0000
    assert p.steps[1].value == 10


def test_bad_numeric_literal():
    err = error_of(with_steps("on h0: csrw slwid 0xZZ"))
    assert (err.line, err.column) == (5, 19)


def test_comments_and_blank_lines():
    text = "# header\n\n" + MINIMAL + "\n# note\non h0: mode HS  # trailing\n\n"
    p = parse_scenario(text)
    assert len(p.steps) == 1


def test_access_defaults():
    s = parse_scenario(with_steps("on h0: access x 0x40 => deny")).steps[0]
    assert s == AccessStmt("h0", False, "x", 0x40, 4, False, None)


def test_anm_cannot_execute():
    text = ("platform {\n nworlds=4;\n anm dma { wid=1; }\n}\n"
            "anm dma: access x 0 => allow\n")
    err = error_of(text)
    assert err.line == 5


def test_checker_forms():
    text = ("platform {\n nworlds=4;\n memory ram { base=0; size=0x100; slots=2; }\n"
            " peripheral uart { base=0x1000; size=0x10; }\n}\n"
            "checker ram slot 1 range 0x10 0x20 wid 3 rw lock => ok\n"
            "checker uart slot 0 range all wid 2 -\n")
    a, b = parse_scenario(text).steps
    assert a == CheckerStmt("ram", 1, (0x10, 0x20), 3, "rw", True, "ok")
    assert b == CheckerStmt("uart", 0, None, 2, "")


def test_spmp_entry_flags():
    s = parse_scenario(with_steps("on h0: spmp 3 napot 0x1000/0x1000 xr s l")).steps[0]
    assert isinstance(s, SpmpStmt)
    assert (s.entry.perms, s.entry.s, s.entry.lock) == ("rx", True, True)


def test_model_variants():
    text = ("platform {\n nworlds=8;\n hart h { ext=[s,h,smwg,smwgd,sswg,shwgd,spmp,spmph]; "
            "spmp=[unified, separate:8]; }\n}\n")
    h = parse_scenario(text).platform.harts[0]
    assert h.models == (("unified", None), ("separate", 8))


@pytest.mark.parametrize("step,line,col", [
    ("on h9: mode HS", 5, 4),                       # undeclared hart
    ("on h0: csrw nosuch 1", 5, 13),                 # unknown CSR
    ("on h0: spmp 0 napot 0x10/0x30 r", 5, 1),       # bad NAPOT region
    ("on h0: access r 0x10 3 => allow", 5, 22),      # size
    ("on h0: access r 0x10 => deny:bus", 5, 30),     # stage
    ("on h0: mode HS extra", 5, 16),                 # trailing token
    ("on h0: vmswitch vmx", 5, 17),                  # undeclared vm
    ("frobnicate", 5, 1),
])
def test_error_positions(step, line, col):
    err = error_of(with_steps(step))
    assert (err.line, err.column) == (line, col)


@pytest.mark.parametrize("platform,line,col", [
    ("platform {\n nworlds = 40;\n hart h { ext=[s,smwg]; }\n}\n", 2, 12),
    ("platform {\n nworlds = 4;\n hart h { mwid=4; }\n}\n", 3, 16),
    ("platform {\n nworlds = 4;\n anm d { wid=9; }\n}\n", 3, 14),
    ("platform {\n nworlds = 4;\n memory a { base=0; size=16; }\n"
     " memory b { base=8; size=16; }\n}\n", 4, 18),
    ("platform {\n hart h { }\n}\n", 1, 1),
    ("platform {\n nworlds = 4;\n hart h { ext=[smwgd]; }\n}\n", 3, 11),
    ("platform {\n nworlds = 4;\n hart h { colour=1; }\n}\n", 3, 11),
    ("nworlds = 4\n", 1, 1),
])
def test_platform_errors(platform, line, col):
    err = error_of(platform)
    assert (err.line, err.column) == (line, col)


def test_unexpected_character():
    err = error_of(with_steps("on h0: mode HS @"))
    assert (err.line, err.column) == (5, 16)


def test_tokenizer_positions():
    toks = tokenize("a  0x1F\n  =>")
    assert [(t.kind, t.line, t.col) for t in toks] == [
        ("word", 1, 1), ("num", 1, 4), ("nl", 1, 8), ("punct", 2, 3), ("eof", 2, 5)]
    assert toks[1].value == 31


@pytest.mark.parametrize("seed", range(200))
def test_round_trip(seed):
    program = random_program(rng_for(seed))
    text = format_program(program)
    again = parse_scenario(text)
    assert again == program
    assert format_program(again) == text


@pytest.mark.parametrize("seed", range(200))
def test_error_locality(seed):
    rng = rng_for(50_000 + seed)
    text = mutate(rng, format_program(random_program(rng)))
    try:
        parse_scenario(text)
    except ParseError as err:
        lines = text.split("\n")
        assert 1 <= err.line <= len(lines)
        line = lines[err.line - 1]
        assert 1 <= err.column <= len(line) + 1
        # the column lands on a token, or just past the end of the line
        assert err.column == len(line) + 1 or not line[err.column - 1].isspace()
