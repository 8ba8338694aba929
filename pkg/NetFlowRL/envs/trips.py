"""
Trip-record ingestion and synthesis.

Trip files are CSV with the header ``origin,dest,pickup_s,travel_s,price``:
integer station ids, pickup time and travel duration in seconds, trip price.
Requests are counted per (origin, destination, time bin) to give Poisson
rates; prices and travel durations are averaged per origin-destination pair.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..exceptions import DomainError, TripRecordError

logger = logging.getLogger(__name__)

TRIP_COLUMNS = ["origin", "dest", "pickup_s", "travel_s", "price"]
DEFAULT_BIN_SECONDS = 180


@dataclass
class TripDemand:
    """
    Demand tensors estimated from trip records.

    Attributes:
        stations: station ids; row/column ``i`` of every matrix is ``stations[i]``
        rates: (n_bins, n, n) requests per bin
        price: (n, n) mean price, NaN where no trip was recorded
        travel_steps: (n, n) mean travel time in bins (>= 1), 0 where unknown
        bin_seconds: bin width
    """

    stations: list
    rates: np.ndarray
    price: np.ndarray
    travel_steps: np.ndarray
    bin_seconds: int = DEFAULT_BIN_SECONDS

    @property
    def n_bins(self):
        return self.rates.shape[0]


def _read_frame(path):
    try:
        return pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=TRIP_COLUMNS)


def load_trip_records(path, stations=None, bin_seconds=DEFAULT_BIN_SECONDS, n_bins=None, days=1):
    """
    Estimate demand tensors from a trip-record CSV.

    Args:
        path: CSV file
        stations: known station ids; ids outside the list are rejected. When
            omitted the stations are the ids present in the file.
        bin_seconds: width of a rate bin
        n_bins: number of bins; records past the last bin are ignored
        days: number of days the file covers (rates are per day)

    Returns:
        TripDemand

    Raises:
        TripRecordError: missing columns, non-numeric fields, negative times
            or unknown station ids (with the offending line numbers)
    """
    if bin_seconds <= 0 or days <= 0:
        raise DomainError("bin_seconds and days must be > 0")
    frame = _read_frame(path)
    missing = [c for c in TRIP_COLUMNS if c not in frame.columns]
    if missing:
        raise TripRecordError(f"{path}: missing columns {missing}")
    frame = frame[TRIP_COLUMNS]
    # header is line 1
    lines = frame.index.to_numpy() + 2

    numeric = frame.apply(pd.to_numeric, errors="coerce").astype(float)
    bad = numeric.isna().any(axis=1).to_numpy()
    if bad.any():
        raise TripRecordError(f"{path}: non-numeric fields", lines[bad])
    ids = numeric[["origin", "dest"]].to_numpy()
    fractional = (ids != np.round(ids)).any(axis=1)
    if fractional.any():
        raise TripRecordError(f"{path}: station ids must be integers", lines[fractional])
    negative = (numeric[["pickup_s", "travel_s"]] < 0).any(axis=1).to_numpy()
    if negative.any():
        raise TripRecordError(f"{path}: negative times", lines[negative])

    origin = numeric["origin"].to_numpy(dtype=int)
    dest = numeric["dest"].to_numpy(dtype=int)
    if stations is None:
        stations = sorted(set(origin.tolist()) | set(dest.tolist()))
    stations = [int(s) for s in stations]
    index = {s: i for i, s in enumerate(stations)}
    unknown = np.array([o not in index or d not in index for o, d in zip(origin, dest)], dtype=bool)
    if unknown.any():
        raise TripRecordError(f"{path}: unknown station ids", lines[unknown])

    n = len(stations)
    bins = (numeric["pickup_s"].to_numpy() // bin_seconds).astype(int)
    if n_bins is None:
        n_bins = int(bins.max()) + 1 if bins.size else 1
    inside = bins < n_bins
    if (~inside).any():
        logger.debug("ignoring %d records past bin %d", int((~inside).sum()), n_bins - 1)

    o_idx = np.array([index[o] for o in origin], dtype=int)
    d_idx = np.array([index[d] for d in dest], dtype=int)
    counts = np.zeros((n_bins, n, n))
    np.add.at(counts, (bins[inside], o_idx[inside], d_idx[inside]), 1.0)

    price = np.full((n, n), np.nan)
    travel_steps = np.zeros((n, n), dtype=int)
    if len(numeric):
        od = pd.DataFrame({
            "o": o_idx, "d": d_idx,
            "price": numeric["price"].to_numpy(), "travel_s": numeric["travel_s"].to_numpy(),
        }).groupby(["o", "d"]).mean()
        o_od = od.index.get_level_values("o").to_numpy()
        d_od = od.index.get_level_values("d").to_numpy()
        price[o_od, d_od] = od["price"].to_numpy()
        travel_steps[o_od, d_od] = np.maximum(1, np.round(od["travel_s"].to_numpy() / bin_seconds)).astype(int)

    logger.info("loaded %d trip records over %d stations and %d bins", len(numeric), n, n_bins)
    return TripDemand(stations, counts / days, price, travel_steps, bin_seconds)


def make_synthetic_trips(rates, path=None, seed=0, bin_seconds=DEFAULT_BIN_SECONDS, stations=None,
                         price=None, travel_steps=None, days=1):
    """
    Sample a trip-record file from known Poisson rates.

    Args:
        rates: (n_bins, n, n) requests per bin and day
        path: CSV destination; nothing is written when None
        seed: sampling seed
        bin_seconds: bin width
        stations: station ids (default ``0 .. n-1``)
        price: (n, n) trip prices (default 1 per trip)
        travel_steps: (n, n) travel times in bins (default 1)
        days: number of days to sample

    Returns:
        pandas.DataFrame with the trip-record columns, sorted by pickup time
    """
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 3 or rates.shape[1] != rates.shape[2]:
        raise DomainError(f"rates must have shape (bins, n, n), got {rates.shape}")
    if np.any(rates < 0):
        raise DomainError("rates must be >= 0")
    n_bins, n, _ = rates.shape
    stations = np.asarray(stations if stations is not None else np.arange(n), dtype=int)
    price = np.ones((n, n)) if price is None else np.asarray(price, dtype=float)
    travel_steps = np.ones((n, n), dtype=int) if travel_steps is None else np.asarray(travel_steps, dtype=int)

    rng = np.random.default_rng(seed)
    counts = rng.poisson(np.broadcast_to(rates, (days,) + rates.shape))
    _, b, o, d = np.nonzero(counts)
    reps = counts[counts > 0]
    b, o, d = np.repeat(b, reps), np.repeat(o, reps), np.repeat(d, reps)
    pickup = (b + rng.uniform(0.0, 1.0, b.size)) * bin_seconds

    frame = pd.DataFrame({
        "origin": stations[o],
        "dest": stations[d],
        "pickup_s": np.floor(pickup * 1000.0) / 1000.0,
        "travel_s": travel_steps[o, d] * bin_seconds,
        "price": price[o, d],
    }).sort_values("pickup_s", kind="stable").reset_index(drop=True)
    if path is not None:
        frame.to_csv(path, index=False)
        logger.info("wrote %d synthetic trips to %s", len(frame), path)
    return frame
