import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FAULT, MODES, WID_CSRS, WidOracle, random_wid_script, rng_for
from wgsim import (AccessViolation, ConfigError, ExtensionSet, HartContext,
                   InitiatorFault, PrivilegeMode, WriteOutcome, csr_read, csr_write,
                   effective_deleg, resolve_wid)
from wgsim.hart import CSR_NAMES, check_nworlds

FULL = ExtensionSet.from_names(["s", "h", "smwg", "smwgd", "sswg", "shwgd", "spmp", "spmph"])
WIDE = ExtensionSet.from_names(["s", "h", "smwg", "smwgd", "sswg", "shwgd", "slwgd",
                                "spmp", "spmph"])


def make_hart(nworlds=8, ext=FULL, mwid=0):
    return HartContext(0, mwid, ext, nworlds)


def in_mode(hart, mode):
    hart.set_mode(mode)
    return hart


# -- extension and WID-count constraints ------------------------------------------

@pytest.mark.parametrize("names", [
    ["smwgd"], ["s", "smwg", "sswg"], ["s", "h", "smwg", "smwgd", "shwgd"],
    ["smwg", "slwgd"], ["s", "spmph"], ["h"],
])
def test_extension_prerequisites(names):
    with pytest.raises(ConfigError):
        ExtensionSet.from_names(names)


def test_extension_names_roundtrip():
    assert ExtensionSet.from_names(FULL.names()) == FULL


@pytest.mark.parametrize("n,ext,ok", [
    (32, FULL, True), (33, FULL, False), (33, WIDE, True), (128, WIDE, True),
    (129, WIDE, False), (0, FULL, False),
])
def test_nworlds_caps(n, ext, ok):
    if ok:
        check_nworlds(n, ext)
        HartContext(0, 0, ext, n)
    else:
        with pytest.raises(ConfigError):
            HartContext(0, 0, ext, n)


def test_virtual_modes_need_hypervisor():
    hart = HartContext(0, 0, ExtensionSet.from_names(["s", "smwg"]), 8)
    hart.set_mode("HS")
    with pytest.raises(ConfigError):
        hart.set_mode("VS")
    mu = HartContext(0, 0, ExtensionSet(), 8)
    mu.set_mode("U")
    with pytest.raises(ConfigError):
        mu.set_mode("HS")


def test_virt_bit_matches_mode():
    hart = make_hart()
    for m in PrivilegeMode:
        hart.set_mode(m)
        assert hart.virt == (m in (PrivilegeMode.VS, PrivilegeMode.VU))


# -- resolve_wid -------------------------------------------------------------------

def test_resolve_m_mode_identity():
    assert resolve_wid(make_hart()) == 0


def test_resolve_hs_reads_mlwid():
    hart = make_hart()
    csr_write(hart, "mwiddeleg", 0b11000)
    csr_write(hart, "mlwid", 3)
    assert resolve_wid(in_mode(hart, "HS")) == 3


def test_resolve_faults_after_revocation():
    hart = make_hart()
    csr_write(hart, "mwiddeleg", 0b110000)
    csr_write(hart, "hslwid", 5)
    csr_write(hart, "mwiddeleg", 0b010000)
    with pytest.raises(InitiatorFault) as e:
        resolve_wid(in_mode(hart, "VS"))
    assert e.value.csr == "hslwid" and e.value.wid == 5


def test_resolve_revocation_exhaustive_n8():
    # every (deleg, lwid) pair at NWorlds=8 against a set-membership oracle
    for deleg in range(256):
        for wid in range(8):
            hart = make_hart()
            csr_write(hart, "mwiddeleg", 0xFF)
            csr_write(hart, "hslwid", wid)
            csr_write(hart, "mwiddeleg", deleg)
            hart.set_mode("VS")
            members = {i for i in range(8) if deleg & (1 << i)}
            if wid in members:
                assert resolve_wid(hart) == wid
            else:
                with pytest.raises(InitiatorFault):
                    resolve_wid(hart)


def test_u_mode_without_sswg_uses_mlwid():
    hart = HartContext(0, 1, ExtensionSet.from_names(["s", "smwg"]), 8)
    csr_write(hart, "mlwid", 6)
    assert resolve_wid(in_mode(hart, "U")) == 6
    assert resolve_wid(in_mode(hart, "HS")) == 6


def test_no_smwg_hardwires_every_mode():
    hart = HartContext(0, 2, ExtensionSet(supervisor=True), 8)
    for m in ("M", "HS", "U"):
        assert resolve_wid(in_mode(hart, m)) == 2


def test_vu_uses_vslwid_vs_uses_hslwid():
    hart = make_hart()
    csr_write(hart, "mwiddeleg", 0b1110000)
    csr_write(hart, "hwiddeleg", 0b1100000)
    csr_write(hart, "hslwid", 4)
    csr_write(hart, "vslwid", 6)
    csr_write(hart, "slwid", 5)
    assert resolve_wid(in_mode(hart, "VS")) == 4
    assert resolve_wid(in_mode(hart, "VU")) == 6
    assert resolve_wid(in_mode(hart, "U")) == 5


# -- csr_write / csr_read ---------------------------------------------------------

def test_delegated_slwid_write_accepted():
    hart = make_hart()
    csr_write(hart, "mwiddeleg", 0b11000)
    assert csr_write(in_mode(hart, "HS"), "slwid", 4) is WriteOutcome.ACCEPTED
    assert csr_read(hart, "slwid") == 4


def test_undelegated_values_ignored_exhaustive():
    for n in range(1, 9):
        for deleg in range(1 << n):
            hart = make_hart(n)
            csr_write(hart, "mwiddeleg", deleg)
            hart.set_mode("HS")
            for v in range(n):
                before = csr_read(hart, "slwid")
                out = csr_write(hart, "slwid", v)
                if deleg >> v & 1:
                    assert out is WriteOutcome.ACCEPTED and csr_read(hart, "slwid") == v
                elif v != before:
                    assert out is WriteOutcome.IGNORED_ILLEGAL_VALUE
                    assert csr_read(hart, "slwid") == before


def test_ignored_write_keeps_old_value():
    hart = make_hart()
    csr_write(hart, "mwiddeleg", 0b11000)
    hart.set_mode("HS")
    csr_write(hart, "slwid", 3)
    assert csr_write(hart, "slwid", 2) is WriteOutcome.IGNORED_ILLEGAL_VALUE
    assert csr_read(hart, "slwid") == 3


def test_vs_slwid_address_aliases_vslwid():
    hart = make_hart()
    csr_write(hart, "mwiddeleg", 0b1001000)
    csr_write(hart, "hwiddeleg", 0b1000000)
    csr_write(hart, "slwid", 3)
    hart.set_mode("VS")
    assert csr_write(hart, "slwid", 6) is WriteOutcome.ACCEPTED
    assert hart.wid_csrs.vslwid == 6
    assert hart.wid_csrs.slwid == 3
    assert csr_read(hart, "slwid") == 6


@pytest.mark.parametrize("mode,csr", [
    ("U", "slwid"), ("U", "mlwid"), ("VU", "slwid"), ("HS", "mlwid"),
    ("HS", "mwiddeleg"), ("VS", "hslwid"), ("VS", "hwiddeleg"), ("VS", "vslwid"),
    ("VS", "mlwid"), ("HS", "mwid"),
])
def test_privilege_violations(mode, csr):
    hart = in_mode(make_hart(), mode)
    with pytest.raises(AccessViolation) as e:
        csr_write(hart, csr, 0)
    assert e.value.reason == "Privilege"
    with pytest.raises(AccessViolation):
        csr_read(hart, csr)


def test_mwid_read_only():
    hart = make_hart(mwid=3)
    assert csr_read(hart, "mwid") == 3
    with pytest.raises(AccessViolation) as e:
        csr_write(hart, "mwid", 1)
    assert e.value.reason == "ReadOnly"
    assert hart.wid_csrs.mwid == 3


def test_wide_window_absent_without_slwgd():
    hart = make_hart(32)
    with pytest.raises(AccessViolation) as e:
        csr_read(hart, "mwiddelegh3")
    assert e.value.reason == "CsrAbsent"


def test_mlwid_roundtrip():
    hart = make_hart()
    csr_write(hart, "mlwid", 7)
    assert csr_read(hart, "mlwid") == 7


def test_mlwid_out_of_range_ignored():
    hart = make_hart(8)
    assert csr_write(hart, "mlwid", 8) is WriteOutcome.IGNORED_ILLEGAL_VALUE


def test_deleg_reads_are_raw():
    hart = make_hart(4)
    csr_write(hart, "mwiddeleg", 0xFFFF_00F3)
    assert csr_read(hart, "mwiddeleg") == 0xFFFF_00F3
    assert effective_deleg(hart, "supervisor") == {0, 1}


# -- effective_deleg ------------------------------------------------------------

def test_effective_vs_is_intersection():
    hart = make_hart()
    csr_write(hart, "mwiddeleg", 0b0110)
    csr_write(hart, "hwiddeleg", 0b1100)
    assert effective_deleg(hart, "virtual_supervisor") == {2}


def test_effective_vs_empty():
    hart = make_hart()
    csr_write(hart, "mwiddeleg", 0xFF)
    assert effective_deleg(hart, "virtual_supervisor") == frozenset()


def test_high_window_delegates_32_to_63():
    hart = make_hart(64, WIDE)
    csr_write(hart, "mwiddelegh", 0xFFFF_FFFF)
    assert set(range(32, 64)) <= effective_deleg(hart, "supervisor")
    assert not effective_deleg(hart, "supervisor") & set(range(32))


def test_128_worlds_all_windows():
    hart = make_hart(128, WIDE)
    for i, w in enumerate(("", "h", "h2", "h3")):
        csr_write(hart, "mwiddeleg" + w, 1 << i)
        csr_write(hart, "hwiddeleg" + w, 1 << i)
    expected = {0, 33, 66, 99}
    assert effective_deleg(hart, "supervisor") == expected
    assert effective_deleg(hart, "virtual_supervisor") == expected
    csr_write(hart, "hslwid", 99)
    assert resolve_wid(in_mode(hart, "VS")) == 99


def test_bits_beyond_nworlds_dropped_at_use():
    hart = make_hart(40, WIDE)
    csr_write(hart, "mwiddelegh", 0xFFFF_FFFF)
    assert max(effective_deleg(hart, "supervisor")) == 39


# -- properties ---------------------------------------------------------------------

scripts = st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.sampled_from(MODES), st.sampled_from(WID_CSRS),
                       st.integers(0, (1 << (n + 2)) - 1)), max_size=4)))


def replay(n, script):
    hart = make_hart(n)
    oracle = WidOracle(n)
    for mode, csr, value in script:
        hart.set_mode(mode)
        expected = oracle.write(mode, csr, value)
        try:
            got = csr_write(hart, csr, value).value
        except AccessViolation:
            got = "trap"
        assert got == expected, (mode, csr, value)
    return hart, oracle


@settings(max_examples=300, deadline=None)
@given(scripts)
def test_resolve_matches_oracle(case):
    n, script = case
    hart, oracle = replay(n, script)
    for mode in MODES:
        hart.set_mode(mode)
        try:
            got = resolve_wid(hart)
        except InitiatorFault:
            got = FAULT
        assert got == oracle.resolve(mode)
        if got != FAULT and mode != "M":
            level = "virtual_supervisor" if mode == "VU" else "supervisor"
            assert mode == "HS" or got in effective_deleg(hart, level)


@settings(max_examples=300, deadline=None)
@given(scripts)
def test_monotone_delegation(case):
    hart, _ = replay(*case)
    assert effective_deleg(hart, "virtual_supervisor") <= effective_deleg(hart, "supervisor")


@settings(max_examples=200, deadline=None)
@given(scripts, st.sampled_from(MODES))
def test_aliasing_touches_exactly_one(case, mode):
    hart, _ = replay(*case)
    hart.set_mode(mode)
    before = (hart.wid_csrs.slwid, hart.wid_csrs.vslwid)
    # pick a value that is legal for whichever register the address reaches
    target = "vslwid" if mode == "VS" else "slwid"
    level = "virtual_supervisor" if target == "vslwid" else "supervisor"
    legal = sorted(effective_deleg(hart, level) - {getattr(hart.wid_csrs, target)})
    try:
        out = csr_write(hart, "slwid", legal[0] if legal else 0)
    except AccessViolation:
        assert mode in ("U", "VU")
        assert (hart.wid_csrs.slwid, hart.wid_csrs.vslwid) == before
        return
    after = (hart.wid_csrs.slwid, hart.wid_csrs.vslwid)
    changed = [a != b for a, b in zip(before, after)]
    if out is WriteOutcome.ACCEPTED and legal:
        assert changed == ([False, True] if mode == "VS" else [True, False])
    else:
        assert changed == [False, False]


@settings(max_examples=200, deadline=None)
@given(scripts)
def test_warl_idempotence(case):
    hart, _ = replay(*case)
    for mode in ("M", "HS", "VS"):
        hart.set_mode(mode)
        for csr in CSR_NAMES:
            try:
                value = csr_read(hart, csr)
            except AccessViolation:
                continue
            if csr == "mwid":
                continue
            assert csr_write(hart, csr, value) is WriteOutcome.ACCEPTED
            assert csr_read(hart, csr) == value


def test_brute_force_equivalence_all_short_scripts_n2():
    # every script of up to two writes over a reduced alphabet at NWorlds=2
    alphabet = [(m, c, v) for m in MODES for c in WID_CSRS for v in range(4)]
    for length in (1, 2):
        for script in itertools.product(alphabet, repeat=length):
            hart, oracle = replay(2, script)
            for mode in MODES:
                hart.set_mode(mode)
                try:
                    got = resolve_wid(hart)
                except InitiatorFault:
                    got = FAULT
                assert got == oracle.resolve(mode)


def test_random_scripts_against_oracle():
    rng = rng_for(7)
    for _ in range(500):
        n = rng.randint(1, 8)
        replay(n, random_wid_script(rng, n, rng.randint(0, 4)))
