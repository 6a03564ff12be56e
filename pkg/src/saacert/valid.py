"""Alias for :mod:`saacert.validation`."""

from .validation import *  # noqa: F401,F403
from .validation import (CalibrationResult, CoveragePlan, CoverageReport,
                         RateReport, TailReport, calibrate_constant,
                         coverage_certificate, coverage_experiment,
                         rate_experiment, replication_rng, tail_experiment,
                         uniform_tail_experiment, wilson_interval)
