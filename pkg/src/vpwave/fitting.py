"""Least-squares fitting, significance testing and the model-selection ladder."""
from dataclasses import dataclass, field
from decimal import Decimal
import logging

import numpy as np
from scipy import stats

from vpwave.errors import (
    AllStartsDiverged,
    InsufficientDegreesOfFreedom,
    InvalidParameters,
    TooFewLevels,
    VPWaveError,
)
from vpwave.marketdata import price_mean
from vpwave.models import Family, ModelSpec
from vpwave import kernels
from vpwave.specfun import J0_FIRST_ZERO, bessel_j0, kummer

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_CONFIDENCE = 0.95
MAX_STARTS = 8
NODE_FRACTION = 0.1


# -- significance --------------------------------------------------------------

def r_squared_critical(n_levels, n_params, confidence=DEFAULT_CONFIDENCE):
    """Smallest R^2 that is significant under the regression F-test.

    R2_crit = k F / (k F + n - k - 1) with F the ``confidence`` quantile of
    F(k, n - k - 1).
    """
    k, n = int(n_params), int(n_levels)
    dfd = n - k - 1
    if k < 1 or dfd < 1:
        raise InsufficientDegreesOfFreedom(f"n_levels={n}, n_params={k} leaves {dfd} residual dof")
    if not 0.0 < confidence < 1.0:
        raise InvalidParameters("confidence must be in (0, 1)")
    f_crit = stats.f.ppf(confidence, k, dfd)
    return float(k * f_crit / (k * f_crit + dfd))


def r_squared(observed, fitted):
    observed = np.asarray(observed, dtype=np.float64)
    ss_res = float(np.sum((observed - fitted) ** 2))
    ss_tot = float(np.sum((observed - observed.mean()) ** 2))
    if ss_tot <= 0.0:
        # nothing to explain: a flat profile carries no evidence for any shape
        return 0.0
    return 1.0 - ss_res / ss_tot


# -- damped least squares --------------------------------------------------------

@dataclass
class LMResult:
    x: np.ndarray
    residuals: np.ndarray
    cost: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


def numerical_jacobian(fun, x, scale, rel_step=1e-6):
    """Central differences with step rel_step * max(|x_j|, scale_j)."""
    cols = []
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), scale[j])
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        cols.append((fun(xp) - fun(xm)) / (xp[j] - xm[j]))
    return np.column_stack(cols)


def levenberg_marquardt(fun, x0, lower, upper, scale, max_iter=200, xtol=1e-10, ftol=1e-12, gtol=1e-12):
    """Minimize ||fun(x)||^2 within box bounds by damped Gauss-Newton steps.

    Steps that do not reduce the objective are rejected and the damping is
    raised, so the objective is non-increasing over accepted iterations.
    Trial points are projected onto the box.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    x = np.clip(np.asarray(x0, dtype=np.float64), lower, upper)
    r = fun(x)
    cost = float(r @ r)
    if not np.isfinite(cost):
        raise AllStartsDiverged("objective not finite at start")
    trace = [cost]
    mu = None
    nu = 2.0
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        jac = numerical_jacobian(fun, x, scale)
        a = jac.T @ jac
        g = jac.T @ r
        # gradient with components pushing against an active bound removed
        pg = g.copy()
        pg[(x <= lower) & (g > 0)] = 0.0
        pg[(x >= upper) & (g < 0)] = 0.0
        if np.max(np.abs(pg * scale)) <= gtol * cost:
            converged = True
            break
        diag = np.maximum(np.diag(a), 1e-300)
        if mu is None:
            mu = 1e-3 * float(diag.max())
        accepted = False
        while True:
            try:
                step = np.linalg.solve(a + mu * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                x_new = np.clip(x + step, lower, upper)
                step = x_new - x
                r_new = fun(x_new)
                cost_new = float(r_new @ r_new)
                if np.isfinite(cost_new) and cost_new < cost:
                    predicted = -(2.0 * g @ step + step @ a @ step)
                    rho = (cost - cost_new) / predicted if predicted > 0 else 0.0
                    mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
                    nu = 2.0
                    accepted = True
                    break
            mu *= nu
            nu *= 2.0
            if mu > 1e30 * float(diag.max()) or not np.isfinite(mu):
                break
        if not accepted:
            # no descent direction left at machine precision
            converged = True
            break
        reduction = cost - cost_new
        small_step = np.linalg.norm(step / scale) <= xtol * (np.linalg.norm(x / scale) + xtol)
        x, r, cost = x_new, r_new, cost_new
        trace.append(cost)
        if small_step or reduction <= ftol * cost:
            converged = True
            break
    return LMResult(x=x, residuals=r, cost=cost, iterations=it, converged=converged, trace=trace)


# -- model families in offset coordinates ---------------------------------------

@dataclass(frozen=True)
class _Problem:
    """A family bound to a grid; prices are offsets from the lowest level."""

    family: Family
    shared_omega: bool
    kummer_order: int
    base_price: float
    offsets: np.ndarray
    tick: float
    target: np.ndarray

    @property
    def span(self):
        return max(float(self.offsets[-1]), self.tick)

    @property
    def n_params(self):
        if self.family is Family.SUPERPOSITION:
            return 4 if self.shared_omega else 5
        return 3

    def model(self, theta):
        u = self.offsets
        if self.family is Family.BESSEL:
            c, w, u0 = theta
            return c * np.abs(kernels.j0(w * (u - u0)))
        if self.family is Family.SUPERPOSITION:
            if self.shared_omega:
                c, w1, u1, u2 = theta
                w2 = w1
            else:
                c, w1, u1, w2, u2 = theta
            return c * (np.abs(kernels.j0(w1 * (u - u1))) + np.abs(kernels.j0(w2 * (u - u2))))
        c, s, u0 = theta
        ax = np.abs(u - u0)
        return c * np.exp(-s * ax) * np.abs(kummer(self.kummer_order, 2.0 * s * ax))

    def residual(self, theta):
        return self.model(theta) - self.target

    def bounds(self):
        peak = float(self.target.max())
        c_lo, c_hi = 1e-12 * peak, 100.0 * peak
        w_lo, w_hi = 1e-4 / self.span, J0_FIRST_ZERO / self.tick
        s_lo, s_hi = 1e-4 / self.span, 0.5 / self.tick
        u_lo, u_hi = -2.0 * self.tick, float(self.offsets[-1]) + 2.0 * self.tick
        if self.family is Family.BESSEL:
            return [c_lo, w_lo, u_lo], [c_hi, w_hi, u_hi]
        if self.family is Family.KUMMER:
            return [c_lo, s_lo, u_lo], [c_hi, s_hi, u_hi]
        if self.shared_omega:
            return [c_lo, w_lo, u_lo, u_lo], [c_hi, w_hi, u_hi, u_hi]
        return [c_lo, w_lo, u_lo, w_lo, u_lo], [c_hi, w_hi, u_hi, w_hi, u_hi]

    def scales(self):
        peak = float(self.target.max())
        inv = 1.0 / self.span
        if self.family is Family.SUPERPOSITION:
            return [peak, inv, self.tick, self.tick] if self.shared_omega else [peak, inv, self.tick, inv, self.tick]
        return [peak, inv, self.tick]

    def theta_from_spec(self, spec):
        q = spec.params
        b = self.base_price
        if self.family is Family.BESSEL:
            return np.array([q["C"], q["omega"], q["p0"] - b])
        if self.family is Family.KUMMER:
            return np.array([q["C"], np.sqrt(q["A"]), q["p0"] - b])
        if self.shared_omega:
            w = float(np.sqrt(q["omega1"] * q["omega2"]))
            return np.array([q["C"], w, q["p01"] - b, q["p02"] - b])
        return np.array([q["C"], q["omega1"], q["p01"] - b, q["omega2"], q["p02"] - b])

    def spec_from_theta(self, theta):
        b = self.base_price
        if self.family is Family.BESSEL:
            c, w, u0 = theta
            return ModelSpec(Family.BESSEL, {"C": c, "omega": w, "p0": b + u0})
        if self.family is Family.KUMMER:
            c, s, u0 = theta
            return ModelSpec(Family.KUMMER, {"C": c, "m": self.kummer_order, "A": s * s, "p0": b + u0})
        if self.shared_omega:
            c, w, u1, u2 = theta
            w2 = w
        else:
            c, w, u1, w2, u2 = theta
        return ModelSpec(Family.SUPERPOSITION, {"C": c, "omega1": w, "p01": b + u1, "omega2": w2, "p02": b + u2})

    def smoothness_key(self, theta):
        """Tie-break: prefer the smoother curve (smaller frequency / decay)."""
        if self.family is Family.SUPERPOSITION and not self.shared_omega:
            return float(theta[1] + theta[3])
        return float(theta[1])


def _problem(dist, family, shared_omega=False, kummer_order=1):
    family = Family.parse(family)
    return _Problem(
        family=family,
        shared_omega=bool(shared_omega) and family is Family.SUPERPOSITION,
        kummer_order=int(kummer_order),
        base_price=float(dist.prices[0]),
        offsets=np.asarray(dist.offsets, dtype=np.float64),
        tick=float(dist.tick),
        target=np.asarray(dist.probabilities, dtype=np.float64),
    )


# -- starting points ---------------------------------------------------------------

def _smooth(p):
    if p.size < 3:
        return p.copy()
    padded = np.concatenate(([p[0]], p, [p[-1]]))
    return (padded[:-2] + padded[1:-1] + padded[2:]) / 3.0


def _j0_inverse(ratio):
    """y in [0, first zero] with J0(y) = ratio, by bisection."""
    ratio = min(max(ratio, 0.0), 1.0)
    lo, hi = 0.0, J0_FIRST_ZERO
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if bessel_j0(mid) > ratio:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _node_frequency(offsets, curve, peak_idx, sides=(-1, 1)):
    """Frequency whose first J0 node falls where the curve first drops below 10% of its peak.

    When the curve never drops that low, J0 is inverted at the farthest level.
    """
    peak = curve[peak_idx]
    if peak <= 0:
        return None
    half_widths = []
    fallback = None
    for direction in sides:
        idx = peak_idx + direction
        while 0 <= idx < curve.size and curve[idx] >= NODE_FRACTION * peak:
            idx += direction
        if 0 <= idx < curve.size:
            half_widths.append(abs(offsets[idx] - offsets[peak_idx]))
            continue
        edge = idx - direction
        dist = abs(offsets[edge] - offsets[peak_idx])
        if dist > 0 and (fallback is None or dist > fallback[0]):
            fallback = (dist, curve[edge] / peak)
    if half_widths:
        return J0_FIRST_ZERO / float(np.mean(half_widths))
    if fallback is None:
        return None
    dist, ratio = fallback
    return _j0_inverse(ratio) / dist


def _local_maxima(curve):
    idx = [
        i for i in range(curve.size)
        if (i == 0 or curve[i] >= curve[i - 1]) and (i == curve.size - 1 or curve[i] > curve[i + 1])
    ]
    return sorted(idx, key=lambda i: -curve[i])


def _two_peaks(offsets, curve):
    n = curve.size
    maxima = _local_maxima(curve)
    first = maxima[0]
    min_sep = max(3, n // 10)
    for i in maxima[1:]:
        if abs(i - first) >= min_sep:
            return tuple(sorted((first, i)))
    other = first + n // 4 if first < n // 2 else first - n // 4
    return tuple(sorted((first, min(max(other, 0), n - 1))))


def _refine_peak(curve, idx, reach=2):
    """Raw-curve argmax near a maximum found on the smoothed curve."""
    lo, hi = max(idx - reach, 0), min(idx + reach + 1, curve.size)
    return lo + int(np.argmax(curve[lo:hi]))


def _decay_rate(offsets, target, peak_idx):
    """Slope of log-probability against distance from the peak, per flank."""
    rates = []
    for side in (slice(peak_idx, None), slice(None, peak_idx + 1)):
        u = np.abs(offsets[side] - offsets[peak_idx])
        y = target[side]
        keep = y > 0
        if keep.sum() >= 3 and np.ptp(u[keep]) > 0:
            slope = np.polyfit(u[keep], np.log(y[keep]), 1)[0]
            if slope < 0:
                rates.append(-slope)
    return float(np.mean(rates)) if rates else None


def _initial_thetas(prob, dist):
    target, offsets = prob.target, prob.offsets
    smooth = _smooth(target)
    argmax = int(np.argmax(target))
    peak = float(target[argmax])
    u_mean = float(price_mean(dist)) - prob.base_price
    centers = [u_mean]
    if abs(offsets[argmax] - u_mean) >= 0.5 * prob.tick:
        centers.append(float(offsets[argmax]))
    default_w = J0_FIRST_ZERO / prob.span
    thetas = []
    if prob.family is Family.BESSEL:
        w0 = _node_frequency(offsets, smooth, argmax) or default_w
        for u0 in centers:
            for f in (1.0, 0.5, 2.0):
                thetas.append([peak, w0 * f, u0])
    elif prob.family is Family.KUMMER:
        s0 = _decay_rate(offsets, target, argmax) or 1.0 / prob.span
        for u0 in (float(offsets[argmax]), u_mean)[: len(centers)]:
            for f in (1.0, 0.5, 2.0):
                thetas.append([peak, s0 * f, u0])
    else:
        i1, i2 = (_refine_peak(target, i) for i in _two_peaks(offsets, smooth))
        w1 = _node_frequency(offsets, smooth, i1, sides=(-1,)) or default_w
        w2 = _node_frequency(offsets, smooth, i2, sides=(1,)) or default_w
        c0 = float(max(target[i1], target[i2]))
        u1, u2 = float(offsets[i1]), float(offsets[i2])
        for f in (1.0, 0.5, 2.0):
            if prob.shared_omega:
                thetas.append([c0, np.sqrt(w1 * w2) * f, u1, u2])
            else:
                thetas.append([c0, w1 * f, u1, w2 * f, u2])
    return [np.array(t, dtype=np.float64) for t in thetas]


def initialize(dist, family, kummer_order=1, shared_omega=False):
    """Deterministic multi-start seeds (at most 8) for a family on a distribution."""
    prob = _problem(dist, family, shared_omega, kummer_order)
    lower, upper = prob.bounds()
    return [prob.spec_from_theta(np.clip(t, lower, upper)) for t in _initial_thetas(prob, dist)][:MAX_STARTS]


# -- fitting -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FitResult:
    spec: ModelSpec
    residuals: np.ndarray
    r_squared: float
    r_squared_crit: float
    significant: bool
    n_levels: int
    iterations: int
    converged: bool
    confidence: float = DEFAULT_CONFIDENCE
    label: str = ""
    n_params: int = 3
    objective_trace: tuple = ()
    tick: Decimal = Decimal("0.01")

    @property
    def family(self):
        return self.spec.family

    @property
    def nearest_tick_center(self):
        """Fitted center snapped to the price grid (as a decimal string)."""
        c = Decimal(repr(self.spec.center))
        return str((c / self.tick).to_integral_value() * self.tick)

    @property
    def rate(self):
        """omega for Bessel families, sqrt(A) for the Kummer family."""
        q = self.spec.params
        if self.family is Family.KUMMER:
            return float(np.sqrt(q["A"]))
        return float(q.get("omega", q.get("omega1")))

    def to_json_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "label": self.label,
            "spec": self.spec.to_json_dict(),
            "n_params": self.n_params,
            "residuals": [float(v) for v in self.residuals],
            "r_squared": self.r_squared,
            "r_squared_crit": self.r_squared_crit,
            "confidence": self.confidence,
            "significant": self.significant,
            "n_levels": self.n_levels,
            "iterations": self.iterations,
            "converged": self.converged,
            "nearest_tick_center": self.nearest_tick_center,
            "tick": str(self.tick),
        }

    @classmethod
    def from_json_dict(cls, data):
        return cls(
            spec=ModelSpec.from_json_dict(data["spec"]),
            residuals=np.asarray(data["residuals"], dtype=np.float64),
            r_squared=float(data["r_squared"]),
            r_squared_crit=float(data["r_squared_crit"]),
            significant=bool(data["significant"]),
            n_levels=int(data["n_levels"]),
            iterations=int(data["iterations"]),
            converged=bool(data["converged"]),
            confidence=float(data.get("confidence", DEFAULT_CONFIDENCE)),
            label=data.get("label", ""),
            n_params=int(data.get("n_params", 3)),
            tick=Decimal(data.get("tick", "0.01")),
        )


def family_label(family, shared_omega=False, kummer_order=1):
    family = Family.parse(family)
    if family is Family.SUPERPOSITION:
        return "superposition-1" if shared_omega else "superposition-2"
    if family is Family.KUMMER:
        return f"kummer-{kummer_order}"
    return "bessel"


def fit(dist, family, init=None, *, kummer_order=1, shared_omega=False, confidence=DEFAULT_CONFIDENCE):
    """Least-squares fit of one family to the observed level probabilities.

    ``init`` may be a ModelSpec or a list of them; they are tried before the
    automatic starts.  The best objective over all starts wins, ties going to
    the smoother curve.
    """
    prob = _problem(dist, family, shared_omega, kummer_order)
    n, k = dist.n_levels, prob.n_params
    if n < k + 2:
        raise TooFewLevels(f"{family_label(prob.family, shared_omega, kummer_order)} needs >= {k + 2} levels, got {n}")
    lower, upper = prob.bounds()
    scale = prob.scales()
    starts = []
    if init is not None:
        for spec in (init if isinstance(init, (list, tuple)) else [init]):
            if spec.family is prob.family:
                starts.append(prob.theta_from_spec(spec))
    starts.extend(_initial_thetas(prob, dist))
    starts = starts[:MAX_STARTS]

    best = None
    for theta0 in starts:
        try:
            res = levenberg_marquardt(prob.residual, theta0, lower, upper, scale)
        except (VPWaveError, FloatingPointError, np.linalg.LinAlgError) as exc:
            log.debug("start %s failed: %s", theta0, exc)
            continue
        if not np.isfinite(res.cost):
            continue
        if best is None:
            best = res
            continue
        tol = 1e-12 * max(best.cost, 1e-300)
        if res.cost < best.cost - tol or (
            abs(res.cost - best.cost) <= tol and prob.smoothness_key(res.x) < prob.smoothness_key(best.x)
        ):
            best = res
    if best is None:
        raise AllStartsDiverged(f"all {len(starts)} starts failed")

    fitted = prob.model(best.x)
    r2 = r_squared(prob.target, fitted)
    r2_crit = r_squared_critical(n, k, confidence)
    return FitResult(
        spec=prob.spec_from_theta(best.x),
        residuals=prob.target - fitted,
        r_squared=r2,
        r_squared_crit=r2_crit,
        significant=bool(r2 > r2_crit),
        n_levels=n,
        iterations=best.iterations,
        converged=best.converged,
        confidence=confidence,
        label=family_label(prob.family, shared_omega, kummer_order),
        n_params=k,
        objective_trace=tuple(best.trace),
        tick=dist.tick,
    )


# -- ladder ----------------------------------------------------------------------------

LADDER = (
    ("bessel", Family.BESSEL, {}),
    ("superposition-1", Family.SUPERPOSITION, {"shared_omega": True}),
    ("superposition-2", Family.SUPERPOSITION, {"shared_omega": False}),
    ("kummer", Family.KUMMER, {}),
)


@dataclass(frozen=True)
class LadderAttempt:
    label: str
    result: FitResult | None = None
    error: str | None = None

    @property
    def significant(self):
        return self.result is not None and self.result.significant


@dataclass(frozen=True)
class LadderReport:
    attempts: tuple
    chosen: int | None

    @property
    def chosen_result(self):
        return None if self.chosen is None else self.attempts[self.chosen].result

    def to_json_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "chosen": self.chosen,
            "chosen_label": None if self.chosen is None else self.attempts[self.chosen].label,
            "attempts": [
                {
                    "label": a.label,
                    "result": None if a.result is None else a.result.to_json_dict(),
                    "error": a.error,
                }
                for a in self.attempts
            ],
        }


def run_ladder(dist, confidence=DEFAULT_CONFIDENCE, kummer_order=1):
    """Try Bessel, one- then two-eigenvalue superposition, then Kummer order m.

    Stops at the first significant fit; every attempt made is recorded.
    """
    attempts = []
    previous = None
    for label, family, opts in LADDER:
        init = None
        if label == "superposition-2" and previous is not None and previous.family is Family.SUPERPOSITION:
            init = previous.spec
        if family is Family.KUMMER:
            label = family_label(family, kummer_order=kummer_order)
        try:
            result = fit(dist, family, init, kummer_order=kummer_order, confidence=confidence, **opts)
        except VPWaveError as exc:
            attempts.append(LadderAttempt(label, None, f"{type(exc).__name__}: {exc}"))
            continue
        previous = result
        attempts.append(LadderAttempt(label, result, None))
        if result.significant:
            return LadderReport(tuple(attempts), len(attempts) - 1)
    return LadderReport(tuple(attempts), None)
