import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orion_dtn.protocols import Packet
from orion_dtn.protocols.prophet import (
    ProphetParams,
    ProphetState,
    prophet_age,
    prophet_encounter,
    prophet_forward,
    prophet_transitivity,
    prophet_update,
)

# 0.8 * 0.98**10 evaluated in exact rational arithmetic
AGED_EXAMPLE = 0.6536582455100375


def state_with(owner=0, **probs):
    s = ProphetState(owner)
    for k, v in probs.items():
        s.set_prob(int(k.lstrip("n")), v)
    return s


class TestUpdate:
    @pytest.mark.parametrize("old,new", [(0.0, 0.75), (0.5, 0.875), (1.0, 1.0)])
    def test_examples(self, old, new):
        s = state_with(n1=old)
        assert prophet_update(s, 1).prob(1) == pytest.approx(new, abs=1e-12)

    def test_self_encounter_rejected(self):
        with pytest.raises(ValueError):
            prophet_update(ProphetState(3), 3)


class TestAge:
    def test_ten_units(self):
        s = state_with(n1=0.8)
        prophet_age(s, 10.0)
        assert s.prob(1) == pytest.approx(AGED_EXAMPLE, abs=1e-9)
        assert s.last_aged_at == 10.0

    def test_partial_unit_is_not_applied(self):
        s = state_with(n1=0.8)
        prophet_age(s, 0.9)
        assert s.prob(1) == 0.8
        assert s.last_aged_at == 0.0

    def test_decays_to_zero(self):
        s = state_with(n1=1.0)
        seen = []
        for t in (1, 10, 100, 1000, 10_000):
            seen.append(prophet_age(s, float(t)).prob(1))
        assert all(a > b for a, b in zip(seen, seen[1:]))
        assert seen[-1] < 1e-80

    def test_time_unit_override(self):
        s = state_with(n1=0.8)
        prophet_age(s, 10.0, time_unit=5.0)
        assert s.prob(1) == pytest.approx(0.8 * 0.98**2, abs=1e-15)

    @given(
        st.floats(min_value=0.0, max_value=1.0),
        st.integers(min_value=0, max_value=500),
        st.integers(min_value=0, max_value=500),
    )
    def test_composition_exact(self, p, n1, n2):
        split = state_with(n1=p)
        prophet_age(split, float(n1))
        prophet_age(split, float(n1 + n2))
        joint = state_with(n1=p)
        prophet_age(joint, float(n1 + n2))
        assert split.prob(1) == joint.prob(1)
        assert np.array_equal(split.vector(), joint.vector())


class TestTransitivity:
    def test_full_product(self):
        s = prophet_transitivity(ProphetState(0), 1.0, {2: 1.0})
        assert s.prob(2) == pytest.approx(0.25, abs=1e-12)

    def test_zero_peer_probability(self):
        s = prophet_transitivity(state_with(n2=0.3), 1.0, {2: 0.0})
        assert s.prob(2) == 0.3

    def test_partial(self):
        s = prophet_transitivity(state_with(n2=0.4), 0.8, {2: 0.5})
        assert s.prob(2) == pytest.approx(0.46, abs=1e-12)

    def test_owner_entry_ignored(self):
        s = prophet_transitivity(ProphetState(0), 1.0, {0: 1.0, 1: 0.5})
        assert s.prob(0) == 0.0

    def test_array_and_mapping_agree(self):
        peer = {1: 0.2, 3: 0.9}
        a = prophet_transitivity(state_with(n1=0.1), 0.7, peer)
        b = prophet_transitivity(state_with(n1=0.1), 0.7, np.array([0.0, 0.2, 0.0, 0.9]))
        assert np.array_equal(a.vector(), b.vector())


class TestEncounter:
    def test_symmetric_direct_reinforcement(self):
        a, b = ProphetState(0), ProphetState(1)
        prophet_encounter(a, b, 0.0)
        assert a.prob(1) == b.prob(0) == 0.75

    def test_transitive_spread(self):
        a, b = ProphetState(0), ProphetState(1)
        b.set_prob(2, 0.8)
        prophet_encounter(a, b, 0.0)
        assert a.prob(2) == pytest.approx(0.75 * 0.8 * 0.25, abs=1e-12)


class TestForward:
    def pk(self, dest=5):
        return Packet(0, 0, dest, (0.0, 0.0), 0.0)

    def test_better_peer(self):
        assert prophet_forward(state_with(n5=0.2), self.pk(), 3, 0.6)

    def test_tie_keeps_copy(self):
        assert not prophet_forward(state_with(n5=0.6), self.pk(), 3, 0.6)

    def test_destination_always(self):
        assert prophet_forward(state_with(n5=0.9), self.pk(), 5, 0.0)


def test_params_validated():
    with pytest.raises(ValueError):
        ProphetParams(gamma=1.0)


op_st = st.one_of(
    st.tuples(st.just("update"), st.integers(min_value=1, max_value=6)),
    st.tuples(st.just("age"), st.floats(min_value=0.0, max_value=50.0)),
    st.tuples(
        st.just("trans"),
        st.floats(min_value=0.0, max_value=1.0),
        st.dictionaries(
            st.integers(min_value=0, max_value=6), st.floats(min_value=0.0, max_value=1.0), max_size=6
        ),
    ),
)


def apply_ops(state, ops):
    t = 0.0
    for op in ops:
        if op[0] == "update":
            prophet_update(state, op[1])
        elif op[0] == "age":
            t += op[1]
            prophet_age(state, t)
        else:
            prophet_transitivity(state, op[1], op[2])
    return state


@given(st.lists(op_st, max_size=40))
def test_probabilities_stay_in_unit_interval(ops):
    v = apply_ops(ProphetState(0), ops).vector()
    assert np.all((v >= 0.0) & (v <= 1.0))
