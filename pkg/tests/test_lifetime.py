import pytest
from hypothesis import assume, given, strategies as st

from marblegate.errors import DomainError
from marblegate.lifetime import EVAPORATION_RATES, apply_evaporation, evaporation_rate, time_to_dryout
from marblegate.physics import CoatingKind, Evaporated, Marble, Vec2, standard_coating

TABLE = {"bare": 0.1392, "ni": 0.1133, "uhdpe": 0.1107, "ni_uhdpe": 0.0998}


def drop(kind, volume=10.0):
    return Marble("m", Vec2(0, 0), Vec2(0, 0), volume, standard_coating(kind), coating_mass=2.5)


@pytest.mark.parametrize("kind, rate", TABLE.items())
def test_rates_match_table(kind, rate):
    assert evaporation_rate(kind) == rate


def test_unknown_kind():
    with pytest.raises(DomainError):
        evaporation_rate("graphite")


def test_rate_ordering():
    r = EVAPORATION_RATES
    assert r[CoatingKind.BARE] > r[CoatingKind.NI] > r[CoatingKind.UHDPE] > r[CoatingKind.NI_UHDPE] > 0


def test_apply_examples():
    assert apply_evaporation(drop("bare"), 10).volume == pytest.approx(10 - 0.1392 * 10, abs=1e-12)
    assert apply_evaporation(drop("bare"), 10).volume == pytest.approx(8.608, abs=1e-12)
    same = apply_evaporation(drop("bare"), 0)
    assert same.volume == 10.0 and same.coating_mass == 2.5
    gone = apply_evaporation(drop("ni_uhdpe"), 200)
    assert gone.volume == 0.0 and isinstance(gone.state, Evaporated)
    assert gone.coating_mass == 2.5


def test_apply_returns_copy():
    m = drop("ni")
    apply_evaporation(m, 5)
    assert m.volume == 10.0


@pytest.mark.parametrize(
    "kind, minutes",
    [("bare", 71.84), ("ni", 88.26), ("uhdpe", 90.33), ("ni_uhdpe", 100.20)],
)
def test_dryout_times(kind, minutes):
    t = time_to_dryout(drop(kind))
    assert t == pytest.approx(10 / TABLE[kind], rel=1e-12)
    assert t == pytest.approx(minutes, abs=0.01)


def test_dryout_of_evaporated_marble():
    with pytest.raises(DomainError):
        time_to_dryout(apply_evaporation(drop("bare"), 100))


@given(st.floats(0.1, 50), st.sampled_from(list(CoatingKind)))
def test_hybrid_lives_longest(volume, kind):
    assert time_to_dryout(drop(CoatingKind.NI_UHDPE, volume)) >= time_to_dryout(drop(kind, volume))


@given(st.floats(0, 200), st.floats(0, 200), st.sampled_from(list(CoatingKind)))
def test_monotone_and_composes(a, b, kind):
    m = drop(kind)
    assume(abs(10.0 - evaporation_rate(kind) * (a + b)) > 1e-9)
    lo, hi = sorted((a, b))
    assert apply_evaporation(m, hi).volume <= apply_evaporation(m, lo).volume
    two = apply_evaporation(apply_evaporation(m, a), b)
    one = apply_evaporation(m, a + b)
    assert two.volume == pytest.approx(one.volume, abs=1e-12)
    assert type(two.state) is type(one.state)
