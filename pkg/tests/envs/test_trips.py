"""
Tests for trip-record ingestion and synthesis.
"""
import numpy as np
import pytest

from NetFlowRL.envs import TRIP_COLUMNS, load_trip_records, make_synthetic_trips
from NetFlowRL.exceptions import DomainError, TripRecordError

HEADER = ",".join(TRIP_COLUMNS) + "\n"


def _write(tmp_path, body, header=HEADER):
    path = tmp_path / "trips.csv"
    path.write_text(header + body)
    return path


def test_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    demand = load_trip_records(path, stations=[0, 1], n_bins=3)
    assert demand.rates.shape == (3, 2, 2)
    assert demand.rates.sum() == 0.0
    assert np.isnan(demand.price).all()


def test_header_only(tmp_path):
    demand = load_trip_records(_write(tmp_path, ""), stations=[4, 7], n_bins=2)
    assert demand.rates.sum() == 0.0
    assert demand.n_bins == 2


def test_identical_records(tmp_path):
    demand = load_trip_records(_write(tmp_path, "0,1,10,360,7.5\n" * 3))
    assert demand.stations == [0, 1]
    assert demand.rates[0, 0, 1] == 3.0
    assert demand.price[0, 1] == 7.5
    assert demand.travel_steps[0, 1] == 2
    assert np.isnan(demand.price[1, 0])


def test_bins_and_days(tmp_path):
    body = "0,1,10,60,2\n0,1,200,60,4\n1,0,400,60,1\n1,0,9000,60,1\n"
    demand = load_trip_records(_write(tmp_path, body), bin_seconds=180, n_bins=3, days=2)
    assert demand.rates[0, 0, 1] == 0.5
    assert demand.rates[1, 0, 1] == 0.5
    assert demand.rates[2, 1, 0] == 0.5
    # record past the last bin is dropped
    assert demand.rates.sum() == 1.5
    assert demand.price[0, 1] == 3.0
    assert demand.travel_steps[0, 1] == 1


def test_station_ids_are_relabelled(tmp_path):
    demand = load_trip_records(_write(tmp_path, "30,10,0,180,1\n"), stations=[10, 20, 30])
    assert demand.rates[0, 2, 0] == 1.0


class TestMalformed:
    """Each malformed file raises TripRecordError naming the offending lines."""

    def test_missing_column(self, tmp_path):
        with pytest.raises(TripRecordError, match="missing columns"):
            load_trip_records(_write(tmp_path, "0,1,0,1\n", header="origin,dest,pickup_s,travel_s\n"))

    def test_non_numeric(self, tmp_path):
        with pytest.raises(TripRecordError, match="non-numeric") as info:
            load_trip_records(_write(tmp_path, "0,1,0,60,1\n0,abc,0,60,1\n"))
        assert info.value.lines == [3]

    def test_unknown_station(self, tmp_path):
        with pytest.raises(TripRecordError, match="unknown station") as info:
            load_trip_records(_write(tmp_path, "0,1,0,60,1\n5,1,0,60,1\n"), stations=[0, 1])
        assert info.value.lines == [3]

    def test_negative_time(self, tmp_path):
        with pytest.raises(TripRecordError, match="negative"):
            load_trip_records(_write(tmp_path, "0,1,-5,60,1\n"))

    def test_fractional_ids(self, tmp_path):
        with pytest.raises(TripRecordError, match="integers"):
            load_trip_records(_write(tmp_path, "0.5,1,0,60,1\n"))


def test_bad_arguments(tmp_path):
    with pytest.raises(DomainError):
        load_trip_records(_write(tmp_path, ""), bin_seconds=0)
    with pytest.raises(DomainError, match="shape"):
        make_synthetic_trips(np.ones((2, 3)))
    with pytest.raises(DomainError, match=">= 0"):
        make_synthetic_trips(-np.ones((1, 2, 2)))


def test_synthesis_recovers_rates(tmp_path):
    rates = np.array([[[0.0, 2.0], [1.0, 0.0]]] * 5)
    rates[2:, 0, 1] = 4.0
    path = tmp_path / "synthetic.csv"
    frame = make_synthetic_trips(rates, path, seed=0, days=400)
    assert list(frame.columns) == TRIP_COLUMNS
    assert frame["pickup_s"].is_monotonic_increasing
    demand = load_trip_records(path, stations=[0, 1], n_bins=5, days=400)
    assert demand.rates.sum() == pytest.approx(rates.sum(), rel=0.05)
    np.testing.assert_allclose(demand.rates, rates, rtol=0.25, atol=0.05)
    assert demand.price[0, 1] == 1.0


def test_synthesis_is_seeded():
    rates = np.full((3, 2, 2), 1.5)
    a = make_synthetic_trips(rates, seed=11)
    b = make_synthetic_trips(rates, seed=11)
    assert a.equals(b)
