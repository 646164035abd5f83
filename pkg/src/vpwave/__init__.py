"""Volume-at-price probability-wave models: Bessel and Kummer eigenfunction fits."""
from vpwave.dynamics import (
    DynamicsProfile,
    check_eigenvalue_identity,
    check_energy_hypothesis,
    compute_profile,
)
from vpwave.fitting import FitResult, LadderAttempt, LadderReport, fit, initialize, r_squared_critical, run_ladder
from vpwave.kernels import BACKEND
from vpwave.marketdata import TradeRecord, VolumeAtPrice, build_distribution, ingest_trades, read_trades
from vpwave.models import Family, ModelCurve, ModelSpec, evaluate, normalize_on_grid
from vpwave.oracle import ResidualReport, bessel_ode_residual, eigenvalue_search, kummer_ode_residual
from vpwave.specfun import bessel_j0, kummer
from vpwave.synth import SynthConfig, generate, generate_two_equilibrium

__all__ = [
    "BACKEND",
    "DynamicsProfile",
    "Family",
    "FitResult",
    "LadderAttempt",
    "LadderReport",
    "ModelCurve",
    "ModelSpec",
    "ResidualReport",
    "SynthConfig",
    "TradeRecord",
    "VolumeAtPrice",
    "bessel_j0",
    "bessel_ode_residual",
    "build_distribution",
    "check_eigenvalue_identity",
    "check_energy_hypothesis",
    "compute_profile",
    "eigenvalue_search",
    "evaluate",
    "fit",
    "generate",
    "generate_two_equilibrium",
    "ingest_trades",
    "initialize",
    "kummer",
    "kummer_ode_residual",
    "normalize_on_grid",
    "r_squared_critical",
    "read_trades",
    "run_ladder",
]
