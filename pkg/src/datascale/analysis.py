"""Quantities derived from a fitted scaling law.

Covers the two operating regimes of the saturating power law and the
crossover between them, the marginal value of additional data, the
data-equivalence factor between two conditions sharing an exponent, and
Monte Carlo estimation of the exponent's sampling variability under
multiplicative loss noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Observation, JointLawParams, PowerLaw, eval_joint_law, eval_law
from .errors import (
    DomainError,
    ExponentMismatchError,
    MonteCarloError,
    SchemaError,
    SingularityError,
)
from .fitting import FitConfig, fit_single

# Replicate losses are redrawn while non-positive, up to this many attempts
# per observation; a replicate that exhausts them is dropped as unusable.
MAX_REDRAWS = 100


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings for exponent-uncertainty estimation.

    Args:
        noise_frac: Relative noise level; replicate losses are drawn from
            ``Normal(loss, noise_frac * loss)`` per observation.
        n_reps: Number of replicates.
        seed: Master seed; replicate ``r`` draws from a stream derived from
            ``(seed, r)`` so results do not depend on evaluation order.
    """

    noise_frac: float = 0.02
    n_reps: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.noise_frac > 0:
            raise DomainError("noise_frac must be positive")
        if self.n_reps < 2:
            raise DomainError("n_reps must be at least 2")


@dataclass(frozen=True)
class McSummary:
    """Distribution summary of the fitted exponent over replicates."""

    mean_p: float
    std_p: float
    quantiles: tuple[float, float, float]
    n_converged: int

    def __post_init__(self):
        q05, q50, q95 = self.quantiles
        if not (q05 <= q50 <= q95):
            raise DomainError(f"quantiles out of order: {self.quantiles}")


def asymptotic_loss(law: PowerLaw) -> float:
    """Loss floor ``alpha * c ** p`` reached as the dataset grows without
    bound; zero when ``c`` is zero."""
    if law.c == 0:
        return 0.0
    return float(law.alpha * law.c**law.p)


def transition_point(law: PowerLaw) -> float | None:
    """Dataset size ``1/c`` where the curve crosses from the data-limited
    into the capacity-limited regime; None when ``c`` is zero (the curve
    never saturates)."""
    if law.c == 0:
        return None
    return 1.0 / law.c


def marginal_value(law: PowerLaw, d_millions) -> float:
    """Instantaneous loss improvement per additional million pairs.

    Returns ``-dL/dD = alpha * p * d**-2 * (1/d + c)**(p-1)``, which scales
    as ``d**-(1+p)`` deep in the data-limited regime and as ``d**-2`` in the
    capacity-limited regime.
    """
    d = np.asarray(d_millions, dtype=float)
    if np.any(d <= 0):
        raise DomainError(f"dataset size must be positive, got {d_millions}")
    base = 1.0 / d + law.c
    if np.any(base <= 0):
        raise SingularityError("1/d + c vanished")
    out = law.alpha * law.p * d**-2.0 * base ** (law.p - 1.0)
    return float(out) if np.isscalar(d_millions) else out


def data_equivalence_factor(law1: PowerLaw, law2: PowerLaw) -> float:
    """Constant data multiplier equating two conditions with a shared exponent.

    In the data-limited regime, condition 1 needs ``(alpha1/alpha2)**(1/p)``
    times the data of condition 2 to reach the same loss.  Only defined when
    the exponents agree.

    Raises:
        ExponentMismatchError: ``|p1 - p2|`` exceeds 1e-9.
    """
    if abs(law1.p - law2.p) > 1e-9:
        raise ExponentMismatchError(
            f"exponents differ ({law1.p} vs {law2.p}); factor requires a shared exponent"
        )
    return float((law1.alpha / law2.alpha) ** (1.0 / law1.p))


# ---------------------------------------------------------------------------
# Regime approximations and their crossover
# ---------------------------------------------------------------------------


def data_limited_derivative(law: PowerLaw, d_millions):
    """Derivative of the data-limited approximation ``alpha * d**-p``."""
    d = np.asarray(d_millions, dtype=float)
    return -law.alpha * law.p * d ** -(law.p + 1.0)


def capacity_limited_derivative(law: PowerLaw, d_millions):
    """Derivative of the capacity-limited linearization
    ``alpha*c**p + alpha*p*c**(p-1)/d``."""
    d = np.asarray(d_millions, dtype=float)
    return -law.alpha * law.p * law.c ** (law.p - 1.0) * d**-2.0


def regime_derivative_crossing(
    law: PowerLaw, lo_factor: float = 0.01, hi_factor: float = 100.0
) -> float | None:
    """Dataset size where the two regime approximations steepen equally.

    Searches ``d in [lo_factor/c, hi_factor/c]`` for the point where the
    magnitudes of :func:`data_limited_derivative` and
    :func:`capacity_limited_derivative` cross, refining by bisection on the
    difference of their log magnitudes.  Returns None when the curves do
    not cross in the window (for ``p = 1`` they coincide everywhere).

    Raises:
        DomainError: ``c`` is zero, so there is no capacity-limited regime.
    """
    if law.c == 0:
        raise DomainError("law has no capacity-limited regime (c = 0)")

    def log_gap(d):
        return float(
            np.log(np.abs(data_limited_derivative(law, d)))
            - np.log(np.abs(capacity_limited_derivative(law, d)))
        )

    lo = lo_factor / law.c
    hi = hi_factor / law.c
    f_lo, f_hi = log_gap(lo), log_gap(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        return None
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        f_mid = log_gap(mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if hi / lo < 1 + 1e-12:
            break
    return math.sqrt(lo * hi)


# ---------------------------------------------------------------------------
# Monte Carlo exponent uncertainty
# ---------------------------------------------------------------------------


def _replicate_losses(losses, noise_frac, rng) -> np.ndarray | None:
    """Draw one noisy replicate, redrawing non-positive values per point."""
    out = np.empty(len(losses))
    for i, loss in enumerate(losses):
        for _ in range(MAX_REDRAWS):
            draw = rng.normal(loss, noise_frac * loss)
            if draw > 0:
                out[i] = draw
                break
        else:
            return None
    return out


def mc_uncertainty(
    obs: list[Observation], cfg_fit: FitConfig, cfg_mc: McConfig
) -> McSummary:
    """Estimate the sampling variability of the fitted exponent.

    Each replicate perturbs every observed loss independently with
    ``Normal(loss, noise_frac * loss)`` noise and refits the power law;
    the summary is taken over replicates whose fit converged.  Replicate
    ``r`` uses a dedicated stream seeded by ``(seed, r)``, so any subset of
    replicates can be reproduced independently.

    Raises:
        MonteCarloError: No replicate produced a converged fit.
    """
    losses = [o.loss for o in obs]
    ps = []
    for rep in range(cfg_mc.n_reps):
        rng = np.random.default_rng([cfg_mc.seed, rep])
        noisy = _replicate_losses(losses, cfg_mc.noise_frac, rng)
        if noisy is None:
            continue
        replicate = [
            Observation(
                condition=o.condition,
                d_millions=o.d_millions,
                loss=float(l),
                n_enc=o.n_enc,
                n_dec=o.n_dec,
                metric=o.metric,
            )
            for o, l in zip(obs, noisy)
        ]
        result = fit_single(replicate, cfg_fit)
        if result.converged:
            ps.append(result.law.p)
    if not ps:
        raise MonteCarloError("no Monte Carlo replicate converged")
    arr = np.array(ps)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    q05, q50, q95 = (float(q) for q in np.quantile(arr, [0.05, 0.5, 0.95]))
    return McSummary(
        mean_p=float(arr.mean()),
        std_p=std,
        quantiles=(q05, q50, q95),
        n_converged=len(arr),
    )


def predict(law, d_millions, n_enc: int | None = None, n_dec: int | None = None):
    """Predicted loss at a query point, dispatching on the law type.

    A :class:`PowerLaw` takes only a dataset size; a
    :class:`JointLawParams` additionally requires both parameter counts.

    Raises:
        SchemaError: Parameter counts passed with a plain power law, or
            missing for a joint law.
    """
    if isinstance(law, PowerLaw):
        if n_enc is not None or n_dec is not None:
            raise SchemaError("parameter counts are meaningless for a plain power law")
        return eval_law(law, d_millions)
    if isinstance(law, JointLawParams):
        if n_enc is None or n_dec is None:
            raise SchemaError("joint-law queries need both parameter counts")
        return eval_joint_law(law, n_enc, n_dec, d_millions)
    raise SchemaError(f"cannot predict from {type(law).__name__}")
