#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""util.py: Contains shared plumbing for the pellmoments package."""

from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar, Union
from concurrent.futures import ProcessPoolExecutor
import json
import logging
import math
import tempfile
import shutil
import pandas as pd

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class PellMomentsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PellMomentsError):
    """A parameter violates a precondition or a resource guard."""


class DomainError(ValidationError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(PellMomentsError):
    """An input violates the contract of an internal map."""


class FactorizationRangeError(ValidationError):
    """An integer is larger than the smallest-prime-factor table."""


class CacheParseError(PellMomentsError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class CacheIntegrityError(PellMomentsError):
    """A cache file parsed but does not describe a valid run."""


class UnreliableClassNumberError(PellMomentsError):
    """Formula class number too far from an integer."""


class QuadratureError(PellMomentsError):
    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


class InvariantFailure(PellMomentsError):
    """A verification run found a counterexample."""

    def __init__(self, message: str, counterexamples: Optional[List] = None):
        super().__init__(message)
        self.counterexamples = counterexamples or []


class TemporaryToPermanent:
    """
    Write to a temporary file and move it into place on a clean close.

    If the with-block raises, the temporary file is discarded and the
    permanent file is left untouched.
    """

    def __init__(self, permanent_file: Path):
        self.permanent_file = Path(permanent_file)

    def __enter__(self):
        return self

    def __exit__(self, exception_type, exception_value, traceback) -> None:
        if exception_type is None:
            self.close()
        else:
            self.file_handle.close()
            self.tmp_directory.cleanup()

    def open(self, *args, **kwargs):
        self.permanent_file.parent.mkdir(parents=True, exist_ok=True)
        self.tmp_directory = tempfile.TemporaryDirectory(dir=self.permanent_file.parent)
        self.tmp_path = Path(self.tmp_directory.name)
        self.temp_file = self.tmp_path / self.permanent_file.name
        self.file_handle = self.temp_file.open(*args, **kwargs)
        return self

    def close(self):
        self.file_handle.close()
        shutil.move(str(self.temp_file), str(self.permanent_file))
        delattr(self, "file_handle")
        self.tmp_directory.cleanup()
        delattr(self, "tmp_path")

    def write(self, *args, **kwargs):
        self.file_handle.write(*args, **kwargs)

    @property
    def closed(self) -> bool:
        if hasattr(self, "file_handle"):
            return self.file_handle.closed
        return True


def exact_sum(values: Iterable[float]) -> float:
    """
    exact_sum returns the correctly rounded sum of values.

    The result does not depend on the order of the summands, so partial
    results computed by any number of workers reduce to identical bits.

    Parameters
    ----------
    values : Iterable[float]
        Summands.

    Returns
    -------
    float
        The correctly rounded sum.
    """
    return math.fsum(float(v) for v in values)


def ordered_map(
    function: Callable[[T], R],
    items: Sequence[T],
    threads: int = 1,
    initializer: Optional[Callable] = None,
    initargs: tuple = (),
    chunksize: int = 64,
) -> List[R]:
    """
    Apply function to items, optionally in a process pool.

    Results are returned in input order regardless of the number of workers.
    """
    if threads <= 1 or len(items) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [function(item) for item in items]
    logger.debug("mapping %d items over %d workers", len(items), threads)
    with ProcessPoolExecutor(
        max_workers=threads, initializer=initializer, initargs=initargs
    ) as pool:
        return list(pool.map(function, items, chunksize=chunksize))


def write_report(
    df: pd.DataFrame, out_path: Union[str, Path], output: str = "csv"
) -> Path:
    """
    write_report writes a report frame as CSV or JSON, atomically.

    CSV uses a stable column order, '.' decimals and full float precision so
    that identical frames give byte-identical files; JSON holds the same
    doubles, with missing values as null.

    Parameters
    ----------
    df : pd.DataFrame
        The report rows.
    out_path : Union[str, Path]
        Target file.
    output : str, optional
        'csv' or 'json', by default 'csv'.

    Returns
    -------
    Path
        The written file.
    """
    out_path = Path(out_path)
    if output == "csv":
        text = df.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    elif output == "json":
        # repr floats round-trip exactly, as the %.17g CSV cells do
        rows = df.astype(object).where(df.notna(), None).to_dict(orient="records")
        text = json.dumps(rows) + "\n"
    else:
        raise ValidationError(f"unknown output format {output!r}")
    with TemporaryToPermanent(out_path).open("w", newline="") as fh:
        fh.write(text)
    logger.info("wrote %d rows to %s", len(df), out_path)
    return out_path
