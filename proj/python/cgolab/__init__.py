"""Python front end of the cgolab numerical lab."""

import json

import numpy as np

from ._core import (
    Error,
    FormatError,
    PreconditionError,
    SolverError,
    eta,
    experiment_names,
    phi,
    psi,
)
from . import _core

__all__ = [
    "Error",
    "FormatError",
    "PreconditionError",
    "SolverError",
    "eta",
    "experiment_names",
    "phi",
    "psi",
    "read_cdf1",
    "run",
]


def run(config, write_artifacts=False):
    """Run an experiment from a config dict (or JSON text) and return the report as a dict."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core.run_json(text, write_artifacts))


def read_cdf1(path):
    """Return (header, array) for a CDF1 file; the array has shape [levels, nx1, ..., nxn, arity]."""
    header = json.loads(_core.read_cdf1_header(str(path)))
    raw = _core.read_cdf1_raw(str(path))
    levels, arity, _ = raw.shape
    data = raw.reshape((levels, arity) + tuple(header["shape"][1:]))
    return header, np.moveaxis(data, 1, -1)
