import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toporacle import npp
from toporacle.npp import Assignment, PartitionInstance

from conftest import brute_energies

items = st.lists(st.integers(1, 50), min_size=1, max_size=10)


def test_energy_examples():
    assert npp.energy(PartitionInstance((1, 2)), Assignment((1, 1))) == 3
    assert npp.energy(PartitionInstance((1, 2)), Assignment((1, -1))) == -1
    assert npp.energy(PartitionInstance((1, 2, 3)), Assignment((1, 1, -1))) == 0


def test_energy_length_mismatch():
    with pytest.raises(ValueError):
        npp.energy(PartitionInstance((1, 2)), Assignment((1,)))


@pytest.mark.parametrize(
    "s, expected",
    [
        ((1, 2), {-3: 1, -1: 1, 1: 1, 3: 1}),
        ((1, 2, 3), {-6: 1, -4: 1, -2: 1, 0: 2, 2: 1, 4: 1, 6: 1}),
        ((1,), {-1: 1, 1: 1}),
        ((5, 5), {-10: 1, 0: 2, 10: 1}),
    ],
)
def test_spectrum_examples(s, expected):
    spec = npp.spectrum(PartitionInstance(s))
    assert spec.entries == expected
    assert spec.total == 2 ** len(s)
    assert spec.e_max == sum(s)


def test_min_abs_energy_examples():
    best, wit = npp.min_abs_energy(PartitionInstance((1, 2)))
    assert best == 1
    assert {w.sigma for w in wit} == {(1, -1), (-1, 1)}
    best, wit = npp.min_abs_energy(PartitionInstance((1, 2, 3)))
    assert best == 0 and len(wit) == 2
    best, wit = npp.min_abs_energy(PartitionInstance((3, 5)))
    assert best == 2
    assert {w.sigma for w in wit} == {(1, -1), (-1, 1)}


def test_meet_in_middle_examples():
    e, w = npp.meet_in_middle_solve(PartitionInstance((1, 2, 3)))
    assert e == 0 and npp.energy(PartitionInstance((1, 2, 3)), w) == 0
    e, w = npp.meet_in_middle_solve(PartitionInstance((1, 2)))
    assert e == 1 and abs(npp.energy(PartitionInstance((1, 2)), w)) == 1
    e, w = npp.meet_in_middle_solve(PartitionInstance((5, 5)))
    assert e == 0 and w.sigma == (1, -1)


def test_meet_in_middle_returns_lowest_index_witness(rng):
    for _ in range(50):
        inst = PartitionInstance(tuple(int(x) for x in rng.integers(1, 9, size=int(rng.integers(1, 9)))))
        best, wit = npp.min_abs_energy(inst)
        e, w = npp.meet_in_middle_solve(inst)
        assert e == best
        assert w.index == min(a.index for a in wit)


def test_flip_examples():
    a = Assignment((1, -1))
    assert npp.flip(a).sigma == (-1, 1)
    assert npp.flip(npp.flip(a)) == a
    inst = PartitionInstance((1, 2))
    assert npp.energy(inst, npp.flip(Assignment((1, 1)))) == -3


def test_index_encoding():
    # bit k set exactly when sigma_k = +1
    assert Assignment((1, -1, -1)).index == 1
    assert Assignment((-1, -1, 1)).index == 4
    for i in range(16):
        assert Assignment.from_index(i, 4).index == i
    table = npp.energies(PartitionInstance((1, 2, 4)))
    for i in range(8):
        assert table[i] == npp.energy(PartitionInstance((1, 2, 4)), Assignment.from_index(i, 3))


@pytest.mark.parametrize("bad", [(), (0, 1), (-3,), (1.5,), (True, 2)])
def test_instance_validation(bad):
    with pytest.raises(ValueError):
        PartitionInstance(bad)


def test_empty_instance_message():
    with pytest.raises(ValueError, match="n >= 1 required"):
        PartitionInstance(())


def test_overflow_rejected():
    with pytest.raises(ValueError, match="overflow"):
        PartitionInstance((npp.INT64_MAX, 1))
    PartitionInstance((npp.INT64_MAX,))


def test_assignment_validation():
    with pytest.raises(ValueError):
        Assignment((1, 0))
    with pytest.raises(ValueError):
        Assignment.from_index(4, 2)


def test_spectrum_guard():
    inst = PartitionInstance(tuple(range(1, 26)))
    with pytest.raises(npp.GuardError, match="max_n=24"):
        npp.spectrum(inst)
    with pytest.raises(npp.GuardError, match="--max-n"):
        npp.spectrum(PartitionInstance((1,) * 5), max_n=4)


def test_mitm_guard_and_large_instance():
    with pytest.raises(npp.GuardError):
        npp.meet_in_middle_solve(PartitionInstance((1,) * 41))
    inst = PartitionInstance(tuple(range(1, 31)))
    e, w = npp.meet_in_middle_solve(inst)
    assert e == (sum(range(1, 31)) % 2) and abs(npp.energy(inst, w)) == e


def test_json_round_trip(tmp_path):
    inst = PartitionInstance((3, 1, 4, 1, 5))
    path = tmp_path / "inst.json"
    path.write_text(inst.to_json())
    assert PartitionInstance.load(path) == inst
    with pytest.raises(ValueError):
        PartitionInstance.from_json(json.dumps([1, 2]))
    with pytest.raises(ValueError):
        PartitionInstance.from_json(json.dumps({"s": 3}))


def test_csv_round_trip_sorted():
    spec = npp.spectrum(PartitionInstance((2, 3, 3)))
    text = spec.to_csv()
    assert text.splitlines()[0] == "energy,multiplicity"
    energies_in_file = [int(line.split(",")[0]) for line in text.splitlines()[1:]]
    assert energies_in_file == sorted(energies_in_file)
    assert npp.EnergySpectrum.from_csv(text) == spec.entries


@settings(max_examples=60, deadline=None)
@given(items)
def test_spectrum_matches_reference_enumeration(s):
    assert npp.spectrum(PartitionInstance(tuple(s))).entries == brute_energies(s)


@settings(max_examples=60, deadline=None)
@given(items)
def test_spectrum_invariants(s):
    spec = npp.spectrum(PartitionInstance(tuple(s)))
    total = sum(s)
    es = spec.energies()
    assert sum(spec.entries.values()) == 2 ** len(s)
    for e in es:
        assert spec.multiplicity(e) == spec.multiplicity(-e)
        assert (e - total) % 2 == 0
        assert -total <= e <= total
    assert all(b - a >= 2 for a, b in zip(es, es[1:]))


@settings(max_examples=60, deadline=None)
@given(items, st.data())
def test_flip_negates_energy(s, data):
    inst = PartitionInstance(tuple(s))
    sigma = data.draw(st.lists(st.sampled_from([1, -1]), min_size=len(s), max_size=len(s)))
    a = Assignment(tuple(sigma))
    assert npp.energy(inst, npp.flip(a)) == -npp.energy(inst, a)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=1, max_size=12))
def test_meet_in_middle_matches_brute_force(s):
    inst = PartitionInstance(tuple(s))
    ref = min(abs(sum(v * g for v, g in zip(s, sigma))) for sigma in itertools.product((1, -1), repeat=len(s)))
    e, w = npp.meet_in_middle_solve(inst)
    assert e == ref
    assert abs(npp.energy(inst, w)) == ref


def test_energies_table_dtype_and_size():
    table = npp.energies(PartitionInstance((7, 11, 13, 2)))
    assert table.dtype == np.int64 and table.shape == (16,)
