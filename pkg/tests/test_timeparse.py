import pytest
from hypothesis import given
from hypothesis import strategies as st

from reqspec.timeparse import (
    ALL_DAYS,
    Always,
    Horizon,
    Recurrence,
    Unknown,
    Window,
    refine_time,
    timespec_from_dict,
)


def test_window_from_daily_period():
    assert refine_time("24 hours period") == Window(24 * 3600)
    assert refine_time("in any 24 hours period") == Window(86400)
    assert refine_time("any 30 minutes period") == Window(1800)


def test_always_phrases():
    assert refine_time("always") == Always()
    assert refine_time("every day") == Always()
    assert refine_time("At all times.") == Always()


def test_weekday_recurrence():
    spec = refine_time("weekdays from 2pm to 5pm")
    assert spec == Recurrence((0, 1, 2, 3, 4), 14 * 3600, 17 * 3600)


def test_recurrence_without_days_covers_the_week():
    spec = refine_time("between 7 am to 8 am")
    assert spec == Recurrence(ALL_DAYS, 7 * 3600, 8 * 3600)


def test_named_day_recurrence():
    spec = refine_time("on monday and wednesday from 09:30 to 17:00")
    assert spec == Recurrence((0, 2), 9 * 3600 + 30 * 60, 17 * 3600)


def test_horizon():
    assert refine_time("for the next 2 hours") == Horizon(7200)
    assert refine_time("next 3 days") == Horizon(3 * 86400)


def test_midnight_and_noon_clocks():
    spec = refine_time("from 12 am to 12 pm")
    assert spec == Recurrence(ALL_DAYS, 0, 12 * 3600)


@pytest.mark.parametrize(
    "raw",
    [
        "purple elephants",
        "from 5pm to 2pm",          # reversed
        "weekdays from 2pm to 2pm", # empty window
        "soonish",
        "from eleven to twelve",
    ],
)
def test_unrefinable_phrases_fall_back_to_unknown(raw):
    spec = refine_time(raw)
    assert isinstance(spec, Unknown)
    assert spec.raw == raw


@given(st.text(max_size=40))
def test_refine_time_is_total(raw):
    spec = refine_time(raw)
    assert isinstance(spec, (Always, Window, Recurrence, Horizon, Unknown))
    if isinstance(spec, Window) or isinstance(spec, Horizon):
        assert spec.duration > 0
    if isinstance(spec, Recurrence):
        assert 0 <= spec.start < spec.end < 86400
        assert spec.days


@given(st.sampled_from([
    "always", "24 hours period", "weekdays from 2pm to 5pm",
    "for the next 2 hours", "garbage in garbage out",
]))
def test_timespec_dict_round_trip(raw):
    spec = refine_time(raw)
    assert timespec_from_dict(spec.to_dict()) == spec
