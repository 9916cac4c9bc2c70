import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from assoc_totient.acceptance import totient_sieve
from assoc_totient.arith import is_prime, radical
from assoc_totient.errors import DataGapError, DomainError, MemoryCapError
from assoc_totient.euler import c_constant
from assoc_totient.sieve import (
    CSV_HEADER,
    build_spf,
    bulk_phi_ratio,
    checkpoints_csv,
    geometric_checkpoints,
    scan,
    smoothed_sum_direct,
)

C_ZETA = 3 / math.pi**2


def _C(spec):
    return c_constant(spec, 1e-12, allow_partial=True)


# --- spf / dense ratios ------------------------------------------------------------


def test_spf_small():
    t = build_spf(10)
    assert [t[n] for n in range(2, 11)] == [2, 3, 2, 5, 2, 7, 2, 3, 2]
    assert build_spf(2)[2] == 2


def test_spf_large_prime():
    t = build_spf(10**6)
    assert is_prime(999983) and t[999983] == 999983


def test_spf_is_smallest_factor():
    t = build_spf(5000)
    for n in range(2, 5001):
        p = t[n]
        assert n % p == 0 and all(n % d for d in range(2, p))


def test_spf_memory_cap():
    with pytest.raises(MemoryCapError):
        build_spf(10**6, memory_cap=1000)
    with pytest.raises(DomainError):
        build_spf(1)


def test_phi_ratio_examples(zeta, delta_chi5):
    r = bulk_phi_ratio(zeta, build_spf(100))
    assert r[8] == 0.5
    assert r[12] == pytest.approx(1 / 3, abs=1e-16)
    assert bulk_phi_ratio(delta_chi5, build_spf(100))[25] == 1


@pytest.mark.parametrize("name", ["zeta", "chi4", "delta_chi5"])
def test_radical_property(builtin_specs, name):
    r = bulk_phi_ratio(builtin_specs[name], build_spf(10**4))
    rad = np.array([0] + [radical(n) for n in range(1, 10**4 + 1)])
    assert np.array_equal(r[1:], r[rad[1:]])


def test_geometric_checkpoints():
    assert geometric_checkpoints(10**2) == [10, 18, 32, 56, 100]
    assert geometric_checkpoints(5) == [5]
    cps = geometric_checkpoints(10**7)
    assert cps[0] == 10 and cps[-1] == 10**7 and len(cps) == 25


# --- scan -------------------------------------------------------------------------


def test_scan_zeta_ten(zeta):
    (row,) = scan(zeta, 10, [10], C_ZETA)
    assert row.S == 32
    # S0 = sum phi(n)/n for n <= 10, exact rational 1307/210
    assert row.S0.real == pytest.approx(1307 / 210, abs=1e-14)
    assert row.E.real == pytest.approx(32 - 100 * C_ZETA, abs=1e-13)
    assert row.E.real == pytest.approx(1.60364490, abs=1e-8)
    assert row.E0.real == pytest.approx(1307 / 210 - 20 * C_ZETA, abs=1e-14)
    assert row.E0.real == pytest.approx(0.14453850, abs=1e-8)
    assert row.smoothed.real == pytest.approx(1307 / 210 - 3.2, abs=1e-14)


def test_scan_zeta_one(zeta):
    (row,) = scan(zeta, 1, [1], C_ZETA)
    assert row.S == 1 and row.S0 == 1
    assert row.E.real == pytest.approx(1 - C_ZETA, abs=1e-16)
    assert row.E0.real == pytest.approx(1 - 2 * C_ZETA, abs=1e-16)
    assert row.smoothed == 0


def test_smoothed_direct_examples(zeta):
    assert smoothed_sum_direct(zeta, 1) == 0
    assert smoothed_sum_direct(zeta, 2) == 0.5
    assert smoothed_sum_direct(zeta, 10).real == pytest.approx(1307 / 210 - 3.2, abs=1e-14)


@pytest.mark.parametrize("x", [10, 100, 1000])
@pytest.mark.parametrize("name", ["zeta", "chi4", "delta_chi5"])
def test_scan_matches_direct(builtin_specs, name, x):
    spec = builtin_specs[name]
    (row,) = scan(spec, x, [x], _C(spec))
    assert abs(row.smoothed - smoothed_sum_direct(spec, x)) <= 1e-9 * x


def test_zeta_integer_oracle(zeta):
    X = 10**5
    exact = np.cumsum(totient_sieve(X))  # int64, exact
    cps = sorted(set(geometric_checkpoints(X)) | {1, 2, 3, 997, 65536, 65537, 99991})
    for row in scan(zeta, X, cps, C_ZETA):
        assert row.S.imag == 0
        assert int(row.S.real) == row.S.real == exact[row.x]


def test_zeta_integer_oracle_across_segments(zeta):
    # crosses several segment boundaries
    X = 600_000
    exact = np.cumsum(totient_sieve(X))
    cps = [131071, 131072, 131073, 262145, 599999, 600000]
    for row in scan(zeta, X, cps, C_ZETA):
        assert row.S.real == exact[row.x]


@pytest.mark.parametrize("name", ["zeta", "chi4", "delta_chi5"])
def test_checkpoint_identities(builtin_specs, name):
    spec = builtin_specs[name]
    X = 9973 if name == "delta_chi5" else 10**5
    C = _C(spec)
    for row in scan(spec, X, geometric_checkpoints(X), C):
        x = row.x
        scale = 1 + abs(row.S)
        assert abs(row.E - (row.S - C.value * x * x)) <= 1e-15 * scale
        assert abs(row.E0 - (row.S0 - 2 * C.value * x)) <= 1e-15 * (1 + abs(row.S0))
        assert abs(row.smoothed - (row.S0 - row.S / x)) <= 1e-15 * (1 + abs(row.S0))


@given(st.sets(st.integers(1, 300_000), min_size=1, max_size=12), st.sets(st.integers(1, 300_000), max_size=12))
def test_checkpoint_consistency(zeta, common, extra):
    coarse = sorted(common)
    fine = sorted(common | extra)
    a = {r.x: r for r in scan(zeta, 300_000, coarse, C_ZETA)}
    b = {r.x: r for r in scan(zeta, 300_000, fine, C_ZETA)}
    for x in coarse:
        assert a[x] == b[x]


def test_checkpoint_consistency_twisted(delta_chi5):
    C = _C(delta_chi5)
    a = scan(delta_chi5, 9973, [100, 5000, 9973], C)
    b = scan(delta_chi5, 9973, list(range(50, 9973, 50)) + [9973], C)
    bx = {r.x: r for r in b}
    assert all(r == bx[r.x] for r in a)


def test_scan_independent_of_xmax(zeta):
    a = scan(zeta, 200_000, [150_000], C_ZETA)[0]
    b = scan(zeta, 400_000, [150_000, 400_000], C_ZETA)[0]
    assert a == b


def test_threads_flag_does_not_change_output(zeta):
    a = scan(zeta, 300_000, [300_000], C_ZETA, threads=1)
    b = scan(zeta, 300_000, [300_000], C_ZETA, threads=None)
    assert a == b


def test_compensated_beats_naive(zeta):
    # fsum of the same terms in float is the reference; the scan must match it
    X = 200_000
    ph = totient_sieve(X)[1:]
    ref = math.fsum((ph / np.arange(1, X + 1)).tolist())
    (row,) = scan(zeta, X, [X], C_ZETA)
    assert abs(row.S0.real - ref) <= 4e-16 * ref


@pytest.mark.parametrize("cps", [[7], [0], [3, 3], [4, 2]])
def test_bad_checkpoints(zeta, cps):
    with pytest.raises(DomainError):
        scan(zeta, 5, cps, C_ZETA)


def test_scan_memory_cap(zeta):
    with pytest.raises(MemoryCapError):
        scan(zeta, 10**6, [10**6], C_ZETA, memory_cap=10**5)


def test_scan_data_gap(delta_chi5):
    with pytest.raises(DataGapError) as err:
        scan(delta_chi5, 10**5, [10**5], 0.1)
    assert err.value.prime == 10007


def test_empty_checkpoint_list(zeta):
    assert scan(zeta, 100, [], C_ZETA) == []


def test_csv_format(zeta):
    text = checkpoints_csv(scan(zeta, 10, [1, 10], C_ZETA))
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[2].startswith("10,32,0,")
    fields = lines[2].split(",")
    assert len(fields) == 11
    assert float(fields[7]) == scan(zeta, 10, [10], C_ZETA)[0].E0.real
    assert checkpoints_csv([]) == CSV_HEADER + "\n"
