"""Parametric, pseudo-Gaussian and signed-rank tests for principal components
of elliptical shape matrices."""

__version__ = "0.1.0"

from .errors import (ConfigError, ConvergenceError, DegenerateDataError,  # noqa: E402
                     DegenerateSpectrumError, DimensionError, DomainError, InfeasibleNullError,
                     InfiniteMomentError, InternalConsistencyError, NumericalError, ParseError,
                     RankPCAError, ValidationError)
from .elliptic import RadialFamily, parse_family  # noqa: E402
from .scores import ScoreSpec, are_ratio, parse_score  # noqa: E402
from .estimate import ShapeEstimate, hr_tyler  # noqa: E402
from .eigtests import TestReport, test_eigval, test_eigvec  # noqa: E402
from .mc import RejectionTable, Scenario, run_scenario, simulate_critical_value  # noqa: E402
