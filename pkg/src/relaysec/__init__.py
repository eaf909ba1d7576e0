"""Secrecy outage analysis of multi-relay amplify-and-forward networks with
relay/jammer selection on delayed CSI: closed forms, quadrature twins and a
reproducible Monte-Carlo engine."""

from .analytic import MetricBundle, Scenario
from .channel import CorrelationCoeffs, FadingParams, correlation_from_delay
from .simulate import MetricEstimate, TrialPlan, estimate, run_campaign, run_trial
from .strategies import RatePair, StrategyKind

__version__ = "0.1.0"

__all__ = [
    "CorrelationCoeffs",
    "FadingParams",
    "MetricBundle",
    "MetricEstimate",
    "RatePair",
    "Scenario",
    "StrategyKind",
    "TrialPlan",
    "correlation_from_delay",
    "estimate",
    "run_campaign",
    "run_trial",
]
