"""Numerical laboratory for input-to-output stability of simulated systems.

The package turns the standard comparison-function stability notions
(IOS, ISS, output Lagrange stability, asymptotic-gain and limit properties,
and their relatives) into machine-checkable certificates over simulated
control systems, provides the constructive certificate transformations that
connect those notions, and ships a zoo of example systems with known
verdicts and counterexample witnesses.
"""

from .comparison import (
    KLFn,
    KnotSequence,
    ScalarFn,
    build_piecewise_kl,
    combine,
    fit_monotone_envelope,
    fn_from_dict,
    fn_to_dict,
    invert,
    kl_eval,
)
from .signals import InputSignal
from .systems import SimPlan, SystemModel, Trajectory, check_axioms, simulate
from .properties import (
    Certificate,
    PropertyId,
    SamplingPlan,
    Verdict,
    Witness,
    build_reachability_bound,
    estimate_gain,
    estimate_tau,
    falsify,
    first_crossing_time,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "InputSignal",
    "KLFn",
    "KnotSequence",
    "PropertyId",
    "SamplingPlan",
    "ScalarFn",
    "SimPlan",
    "SystemModel",
    "Trajectory",
    "Verdict",
    "Witness",
    "build_piecewise_kl",
    "build_reachability_bound",
    "check_axioms",
    "combine",
    "estimate_gain",
    "estimate_tau",
    "falsify",
    "first_crossing_time",
    "fit_monotone_envelope",
    "fn_from_dict",
    "fn_to_dict",
    "invert",
    "kl_eval",
    "simulate",
    "verify",
]
