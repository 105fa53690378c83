"""Exact concentration functions of random linear, bilinear, quadratic and
multilinear forms, with bound checks and arithmetic structure detectors."""

__version__ = "0.1.0"

from .scalars import GaussianRational, Rational, gcd_all, divisor_count, height
from .forms import (AtomDistribution, BilinearForm, LinearForm, MultilinearForm, QuadraticForm,
                    TargetFunction, RADEMACHER)
from .dist import (ConcentrationReport, ValueDistribution, bilinear_conditional_concentration,
                   concentration, joint_distribution, linear_distribution, monte_carlo_probability,
                   multilinear_concentration, quadratic_concentration)

__all__ = [
    "GaussianRational", "Rational", "gcd_all", "divisor_count", "height",
    "AtomDistribution", "BilinearForm", "LinearForm", "MultilinearForm", "QuadraticForm",
    "TargetFunction", "RADEMACHER",
    "ConcentrationReport", "ValueDistribution", "bilinear_conditional_concentration",
    "concentration", "joint_distribution", "linear_distribution", "monte_carlo_probability",
    "multilinear_concentration", "quadratic_concentration",
]
