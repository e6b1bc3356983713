import itertools
import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brute import fm_by_partitions
from fmsched.core import (
    Instance,
    InvalidInstance,
    Schedule,
    apply_property2,
    format_rational,
    is_flowtime_optimal,
    load_instance,
    makespan,
    normalize_instance,
    parse_rational,
    total_flowtime,
)

times = st.lists(st.integers(0, 9), min_size=1, max_size=9)


def ints(inst):
    return [int(x) for x in inst.p]


class TestRationals:
    def test_parse_accepts_exact_forms(self):
        assert parse_rational(3) == 3
        assert parse_rational("3/4") == F(3, 4)
        assert parse_rational(" 6/8 ") == F(3, 4)
        assert parse_rational(F(1, 3)) == F(1, 3)

    @pytest.mark.parametrize("bad", [0.5, True, "x", "1/0", None, [1]])
    def test_parse_rejects(self, bad):
        with pytest.raises(InvalidInstance):
            parse_rational(bad)

    def test_format(self):
        assert format_rational(F(8, 7)) == "8/7"
        assert format_rational(F(4)) == "4/1"
        assert parse_rational(format_rational(F(-13, 11))) == F(-13, 11)


class TestNormalize:
    def test_pads_one_zero(self):
        inst = normalize_instance([4, 3, 3, 2, 2], 2)
        assert ints(inst) == [4, 3, 3, 2, 2, 0]
        assert inst.k == 3

    def test_already_normal(self):
        assert ints(normalize_instance([4, 3, 3, 2, 2, 0], 2)) == [4, 3, 3, 2, 2, 0]

    def test_pads_two_zeros(self):
        inst = normalize_instance([1], 3)
        assert ints(inst) == [1, 0, 0]
        assert inst.k == 1

    def test_sorts_stably_and_records_origin(self):
        inst = normalize_instance([1, 3, 1, 2], 2)
        assert ints(inst) == [3, 2, 1, 1]
        assert inst.origin == (1, 3, 0, 2)

    @pytest.mark.parametrize("raw,m", [([-1, 2], 2), ([], 2), ([1], 0), ([1], "2")])
    def test_rejects(self, raw, m):
        with pytest.raises(InvalidInstance):
            normalize_instance(raw, m)

    def test_direct_constructor_validates(self):
        with pytest.raises(InvalidInstance):
            Instance(2, (F(1), F(2)))
        with pytest.raises(InvalidInstance):
            Instance(2, (F(2), F(1), F(1)))


class TestAccessors:
    def test_tight_m2(self):
        inst = normalize_instance([4, 3, 3, 2, 2, 0], 2)
        assert [inst.lam(r) for r in (1, 2, 3)] == [4, 3, 2]
        assert [inst.mu(r) for r in (1, 2, 3)] == [3, 2, 0]
        assert inst.tau(2, 2) == 2
        assert inst.rank(3) == (2, 0)
        assert inst.rank_of(4) == 3
        assert inst.total() == 14

    @given(times, st.integers(1, 3))
    def test_chain(self, raw, m):
        inst = normalize_instance(raw, m)
        for r in range(1, inst.k + 1):
            assert inst.lam(r) >= inst.mu(r) >= 0
            if r < inst.k:
                assert inst.mu(r) >= inst.lam(r + 1)
            assert [inst.tau(i, r) for i in range(1, m + 1)] == list(inst.rank(r))


class TestProperty2:
    def test_four_jobs(self):
        # rank 2 (3, 2) drops by 2 to (1, 0); rank 1 (5, 4) then drops by 4 - 1
        assert ints(apply_property2(normalize_instance([5, 4, 3, 2], 2))) == [2, 1, 1, 0]

    def test_fixed_point(self):
        inst = normalize_instance([4, 3, 3, 2, 2, 0], 2)
        assert apply_property2(inst).p == inst.p

    @pytest.mark.parametrize("m,n", [(1, 3), (2, 6), (3, 6)])
    def test_all_equal_collapses(self, m, n):
        assert set(apply_property2(normalize_instance([5] * n, m)).p) == {0}

    @given(times, st.integers(1, 3))
    def test_postconditions(self, raw, m):
        inst = normalize_instance(raw, m)
        out = apply_property2(inst)
        assert (out.m, out.k) == (inst.m, inst.k)
        assert all(b <= a for a, b in zip(inst.p, out.p))
        for r in range(1, out.k):
            assert out.mu(r) == out.lam(r + 1)
        assert out.mu(out.k) == 0
        assert apply_property2(out) == out


class TestJson:
    @given(st.lists(st.fractions(min_value=0, max_value=20, max_denominator=12), min_size=1, max_size=8),
           st.integers(1, 4))
    def test_round_trip(self, raw, m):
        inst = normalize_instance(raw, m)
        again = Instance.from_json(json.loads(json.dumps(inst.to_json())))
        assert again.p == inst.p and again.m == inst.m

    def test_load_mixed_entries(self, tmp_path):
        path = tmp_path / "i.json"
        path.write_text('{"m": 2, "p": [1, "3/2", "1/2"]}')
        assert load_instance(path).p == (F(3, 2), F(1), F(1, 2), F(0))

    @pytest.mark.parametrize("text", ['{"m": 2}', '{"m": 2, "p": [0.5]}', '{"m": "2", "p": [1]}', "nope",
                                      '{"m": 2, "p": 3}'])
    def test_load_rejects(self, tmp_path, text):
        path = tmp_path / "i.json"
        path.write_text(text)
        with pytest.raises(InvalidInstance):
            load_instance(path)


def _all_assignments(inst):
    """Every rank-respecting assignment, rank 1 included."""
    m, k = inst.m, inst.k
    perms = list(itertools.permutations(range(m)))
    for combo in itertools.product(perms, repeat=k):
        rows = [[None] * k for _ in range(m)]
        for r, perm in enumerate(combo, start=1):
            jobs = list(inst.rank_jobs(r))
            for i, pos in enumerate(perm):
                rows[i][r - 1] = jobs[pos]
        yield Schedule.flowtime_optimal(inst, rows)


class TestSchedules:
    def test_single_machine(self):
        inst = normalize_instance([3, 2, 1], 1)
        s = Schedule.flowtime_optimal(inst, [[0, 1, 2]])
        assert makespan(s) == 6
        assert total_flowtime(s) == 10
        assert is_flowtime_optimal(s)

    def test_all_zero(self):
        inst = normalize_instance([0, 0, 0, 0], 2)
        s = Schedule.flowtime_optimal(inst, [[0, 2], [1, 3]])
        assert makespan(s) == 0 and total_flowtime(s) == 0

    def test_tight_witness(self):
        # machine 0 runs 0, 3, 4 and machine 1 runs 2, 2, 3 (rank 3 first)
        inst = normalize_instance([4, 3, 3, 2, 2, 0], 2)
        s = Schedule.flowtime_optimal(inst, [[0, 2, 5], [1, 3, 4]])
        assert [list(s.machine_times(i)) for i in range(2)] == [[4, 3, 0], [3, 2, 2]]
        assert s.loads() == (7, 7)
        assert is_flowtime_optimal(s)

    def test_rejects_late_rank_k(self):
        inst = normalize_instance([4, 3, 3, 2, 2, 0], 2)
        good = Schedule.flowtime_optimal(inst, [[0, 2, 5], [1, 3, 4]])
        starts = [list(r) for r in good.starts]
        starts[0] = [x + 1 for x in starts[0]]
        assert not is_flowtime_optimal(Schedule(inst, good.assignment, tuple(map(tuple, starts))))

    def test_rejects_idle_time(self):
        inst = normalize_instance([4, 3, 3, 2, 2, 0], 2)
        good = Schedule.flowtime_optimal(inst, [[0, 2, 5], [1, 3, 4]])
        starts = [list(r) for r in good.starts]
        starts[1][0] += 1
        assert not is_flowtime_optimal(Schedule(inst, good.assignment, tuple(map(tuple, starts))))

    def test_rejects_rank_violation(self):
        inst = normalize_instance([4, 3, 3, 2, 2, 0], 2)
        # job 4 (time 2) in the rank-1 slot and job 0 (time 4) in rank 3
        s = Schedule.flowtime_optimal(inst, [[4, 2, 5], [1, 3, 0]])
        assert not is_flowtime_optimal(s)

    def test_equal_times_may_swap_ranks(self):
        inst = normalize_instance([3, 2, 2, 1], 2)
        # jobs 1 and 2 both take 2, one from each rank
        s = Schedule.flowtime_optimal(inst, [[0, 1], [2, 3]])
        assert is_flowtime_optimal(s)

    def test_rejects_duplicate_job(self):
        inst = normalize_instance([3, 2, 2, 1], 2)
        assert not is_flowtime_optimal(Schedule.flowtime_optimal(inst, [[0, 2], [0, 3]]))

    def test_shape_checked(self):
        inst = normalize_instance([3, 2, 2, 1], 2)
        with pytest.raises(ValueError):
            Schedule.flowtime_optimal(inst, [[0, 2, 1], [1, 3, 0]])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 3), st.integers(1, 3), st.data())
    def test_flowtime_constant_and_minimal(self, m, k, data):
        raw = data.draw(st.lists(st.integers(0, 5), min_size=m * k, max_size=m * k))
        inst = normalize_instance(raw, m)
        flows = {total_flowtime(s) for s in _all_assignments(inst)}
        assert len(flows) == 1
        if inst.n <= 8:
            assert flows == {fm_by_partitions(inst.p, m)[0]}
