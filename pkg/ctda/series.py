"""
Time series ingestion, calendar alignment, train/test splitting and the
seeded FIR generator.

Timestamps are integer day indices. ISO dates are accepted at the
boundary and converted to days since 1970-01-01.

"""
from dataclasses import dataclass, field, replace
import math
import os

import numpy as np
import pandas as pd
from scipy import signal

from ctda import watchers
from ctda.exceptions import DataFormatError, InsufficientData
from ctda.utils import freeze

EPOCH = pd.Timestamp('1970-01-01')

INPUT_PROCESSES = ('iid_gaussian', 'iid_binary')
ALIGN_POLICIES = ('inner', 'forward_fill')


@dataclass(frozen=True, eq=False)
class TimeSeries:
    name: str
    timestamps: np.ndarray
    values: np.ndarray
    dated: bool = False

    def __post_init__(self):
        timestamps = np.asarray(self.timestamps, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if timestamps.ndim != 1 or timestamps.shape != values.shape:
            raise ValueError("Series %r: timestamps and values differ in "
                             "shape" % self.name)
        if timestamps.size < 1:
            raise ValueError("Series %r is empty" % self.name)
        if np.any(np.diff(timestamps) <= 0):
            raise ValueError("Series %r: timestamps are not strictly "
                             "increasing" % self.name)
        if not np.all(np.isfinite(values)):
            raise ValueError("Series %r has non-finite values" % self.name)
        object.__setattr__(self, 'timestamps', freeze(timestamps))
        object.__setattr__(self, 'values', freeze(values))

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class AlignedSeries:
    """
    Several series on a common calendar.

    The first `warmup` rows only provide history for delay lines.
    """
    names: tuple
    timestamps: np.ndarray
    values: np.ndarray
    dated: bool = False
    warmup: int = field(default=0)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.names):
            raise ValueError("Aligned values must have one column per name")
        object.__setattr__(self, 'names', tuple(self.names))
        object.__setattr__(self, 'timestamps',
                           freeze(np.asarray(self.timestamps,
                                             dtype=np.int64)))
        object.__setattr__(self, 'values', freeze(values))

    def __len__(self):
        return self.timestamps.size

    def column(self, name):
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise KeyError(name)

    def rows(self, start, stop, warmup=0):
        return replace(self,
                       timestamps=self.timestamps[start:stop],
                       values=self.values[start:stop],
                       warmup=warmup)


def parse_timestamp(text):
    """Return ``(day_index, dated)`` for an integer or ISO date string."""
    text = text.strip()
    try:
        return int(text), False
    except ValueError:
        pass
    try:
        stamp = pd.Timestamp(text)
    except (ValueError, TypeError) as exc:
        raise ValueError("Invalid timestamp %r" % text) from exc
    if stamp is pd.NaT:
        raise ValueError("Invalid timestamp %r" % text)
    return int((stamp.normalize() - EPOCH).days), True


def format_timestamp(day, dated):
    if dated:
        return (EPOCH + pd.Timedelta(days=int(day))).strftime('%Y-%m-%d')
    else:
        return str(int(day))


def load_csv(path, time_column='date', value_column='value', name=None):
    """
    Load one series from a UTF-8 CSV file.

    Errors name the offending line (the header is line 1).
    """
    if name is None:
        name = os.path.splitext(os.path.basename(str(path)))[0]

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False,
                            encoding='utf-8')
    except pd.errors.ParserError as exc:
        raise DataFormatError("%s: %s" % (path, exc)) from exc
    except pd.errors.EmptyDataError as exc:
        raise DataFormatError("%s: empty file" % path) from exc

    for column in (time_column, value_column):
        if column not in frame.columns:
            raise DataFormatError("%s: missing column %r" % (path, column))

    timestamps, values, seen = [], [], dict()
    dated = set()
    for offset, (raw_time, raw_value) in enumerate(
            zip(frame[time_column], frame[value_column])):
        line = offset + 2
        try:
            day, is_date = parse_timestamp(raw_time)
        except ValueError as exc:
            raise DataFormatError("%s:%d: %s" % (path, line, exc)) from exc
        try:
            value = float(raw_value)
        except ValueError as exc:
            raise DataFormatError("%s:%d: invalid value %r"
                                  % (path, line, raw_value)) from exc
        if not math.isfinite(value):
            raise DataFormatError("%s:%d: non-finite value %r"
                                  % (path, line, raw_value))
        if day in seen:
            raise DataFormatError(
                "%s:%d: duplicate timestamp %r (first seen on line %d)"
                % (path, line, raw_time.strip(), seen[day]))
        if timestamps and day < timestamps[-1]:
            raise DataFormatError("%s:%d: timestamp %r out of order"
                                  % (path, line, raw_time.strip()))
        seen[day] = line
        dated.add(is_date)
        timestamps.append(day)
        values.append(value)

    if not timestamps:
        raise DataFormatError("%s: no rows" % path)
    if len(dated) > 1:
        raise DataFormatError("%s: mixes dates and day indices" % path)

    watchers.DATA.info("Loaded %r: %d rows from %s", name, len(values), path)
    return TimeSeries(name, timestamps, values, dated=dated.pop())


def save_csv(series, path):
    frame = pd.DataFrame({
        'date': [format_timestamp(t, series.dated)
                 for t in series.timestamps],
        'value': series.values})
    frame.to_csv(path, index=False, float_format='%.17g',
                 lineterminator='\n')


def align(series, policy='inner'):
    """
    Put several series on a common calendar.

    ``inner`` keeps the timestamps present in every series.
    ``forward_fill`` keeps their union, carrying the last observed value
    forward and dropping the dates before the latest first observation.

    """
    series = list(series)
    if len(series) < 2:
        raise ValueError("align needs at least 2 series")
    if policy == 'ffill':
        policy = 'forward_fill'
    if policy not in ALIGN_POLICIES:
        raise ValueError("Unknown alignment policy %r" % policy)
    names = [s.name for s in series]
    if len(set(names)) != len(names):
        raise ValueError("Series names must be unique: %r" % names)
    if len({s.dated for s in series}) > 1:
        raise ValueError("Cannot align dated and undated series")

    columns = [pd.Series(s.values, index=s.timestamps, name=s.name)
               for s in series]
    if policy == 'inner':
        frame = pd.concat(columns, axis=1, join='inner')
    else:
        frame = pd.concat(columns, axis=1, join='outer').sort_index()
        frame = frame.ffill().dropna()
    frame = frame.sort_index()

    if frame.empty:
        raise InsufficientData("The series have no common timestamps")

    watchers.DATA.info("Aligned %d series (%s): %d rows",
                       len(series), policy, len(frame))
    return AlignedSeries(tuple(names), frame.index.to_numpy(),
                         frame.to_numpy(dtype=float),
                         dated=series[0].dated)


def _select(timestamps, bounds):
    start, stop = bounds
    mask = np.ones(timestamps.size, dtype=bool)
    if start is not None:
        mask &= timestamps >= start
    if stop is not None:
        mask &= timestamps < stop
    return np.flatnonzero(mask)


def split(aligned, train_range, test_range, history=0):
    """
    Split into a training block and a test block.

    Ranges are half-open ``(start, stop)`` timestamp bounds, ``None``
    meaning unbounded. The test block is prefixed with the `history`
    rows immediately preceding it, recorded as its `warmup`.

    """
    train_rows = _select(aligned.timestamps, train_range)
    test_rows = _select(aligned.timestamps, test_range)
    if train_rows.size == 0:
        raise ValueError("Training range %r selects no rows"
                         % (train_range, ))
    if test_rows.size == 0:
        raise ValueError("Test range %r selects no rows" % (test_range, ))
    if train_rows[-1] >= test_rows[0]:
        raise ValueError("Training range must end before the test range "
                         "begins")
    if history < 0:
        raise ValueError("history must be >= 0")

    warmup = min(history, int(test_rows[0]))
    if warmup < history:
        watchers.DATA.warning("Only %d history rows available before the "
                              "test block (%d requested)", warmup, history)

    train = aligned.rows(train_rows[0], train_rows[-1] + 1)
    test = aligned.rows(test_rows[0] - warmup, test_rows[-1] + 1,
                        warmup=warmup)
    return train, test


def gen_fir_series(seed, n, coefficients, input_process='iid_gaussian',
                   noise_sigma=0.0):
    """
    Draw independent inputs and their noisy FIR response.

    ``Y[t] = sum_m sum_l c[m][l] X_m[t-l] + eps[t]`` with inputs taken as
    zero before ``t = 0`` and ``eps ~ N(0, noise_sigma**2)``.

    Returns the list of input series (``x1``, ``x2``...) and the target
    series ``y``, sampled on day indices ``0 .. n-1``.

    """
    coefficients = [np.atleast_1d(np.asarray(c, dtype=float))
                    for c in coefficients]
    if not coefficients:
        raise ValueError("At least one channel is needed")
    if n <= max(c.size for c in coefficients):
        raise InsufficientData("n must exceed the longest coefficient "
                               "vector")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    if input_process not in INPUT_PROCESSES:
        raise ValueError("Unknown input process %r" % input_process)

    rng = np.random.default_rng(seed)
    if input_process == 'iid_gaussian':
        inputs = rng.standard_normal((len(coefficients), n))
    else:
        inputs = 2.0 * rng.integers(0, 2, size=(len(coefficients), n)) - 1.0
    noise = noise_sigma * rng.standard_normal(n)

    target = noise.copy()
    for taps, x in zip(coefficients, inputs):
        target += signal.lfilter(taps, [1.0], x)

    days = np.arange(n)
    return ([TimeSeries("x%d" % (m + 1), days, x)
             for m, x in enumerate(inputs)],
            TimeSeries("y", days, target))
