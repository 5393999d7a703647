"""Fast geometric convergence of nonlinear recurrences, plus the
integrating-factor limsup bound.

A recurrence Y_{i+1} <= sum_k A_k * B_k^i * Y_i^(1+mu_k) contracts to zero
whenever Y_0 is small enough; the single-term closed-form bound and the
multi-term smallness thresholds are implemented exactly, in log space (the
(1+mu)^i growth of the exponents overflows doubles within a few dozen
iterations otherwise).  Zero is represented by log value -inf.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GeometricRecurrence:
    """Term list [(A_k, B_k, mu_k)] with A_k > 0, B_k > 1, mu_k > 0, plus
    the starting value Y0 >= 0."""

    terms: tuple
    Y0: float

    def __post_init__(self):
        terms = tuple((float(A), float(B), float(mu)) for A, B, mu in self.terms)
        object.__setattr__(self, "terms", terms)
        if len(terms) < 1:
            raise ValueError("at least one term required")
        for A, B, mu in terms:
            if A <= 0.0 or B <= 1.0 or mu <= 0.0:
                raise ValueError("terms need A > 0, B > 1, mu > 0")
        if self.Y0 < 0.0:
            raise ValueError("Y0 must be nonnegative")

    @property
    def m(self):
        return len(self.terms)

    @property
    def B_max(self):
        return max(B for _, B, _ in self.terms)

    @property
    def mu_min(self):
        return min(mu for _, _, mu in self.terms)


def single_term_bound_log(A, B, mu, Y0, i):
    """log of the closed-form envelope for Y_{i+1} <= A B^i Y_i^(1+mu):

        Y_i <= A^theta * B^(theta/mu - i/mu) * Y0^((1+mu)^i),

    theta = ((1+mu)^i - 1)/mu.  Exact at i = 0.  Returns -inf for Y0 = 0
    and +inf on overflow.
    """
    if A <= 0.0 or B <= 1.0 or mu <= 0.0:
        raise ValueError("need A > 0, B > 1, mu > 0")
    if i < 0:
        raise ValueError("i must be nonnegative")
    if Y0 < 0.0:
        raise ValueError("Y0 must be nonnegative")
    if Y0 == 0.0:
        return -math.inf
    # grouped form: log Y_i = theta * D + log Y0 - (i/mu) log B with
    # D = log A + log B / mu + mu log Y0 and theta = ((1+mu)^i - 1)/mu.
    # D vanishes exactly at the smallness threshold, so this grouping avoids
    # the catastrophic cancellation of the naive term-by-term sum.
    growth = math.exp(i * math.log1p(mu))  # (1+mu)^i, may overflow to inf
    theta = (growth - 1.0) / mu
    log_y0 = math.log(Y0)
    d = math.log(A) + math.log(B) / mu + mu * log_y0
    total = theta * d + log_y0 - (i / mu) * math.log(B)
    if math.isnan(total):
        return math.inf
    return total


def single_term_bound(A, B, mu, Y0, i):
    """The closed-form envelope itself (0.0 on underflow, inf on overflow)."""
    lv = single_term_bound_log(A, B, mu, Y0, i)
    if lv == -math.inf:
        return 0.0
    if lv == math.inf:
        return math.inf
    try:
        return math.exp(lv)
    except OverflowError:
        return math.inf


def single_term_threshold(A, B, mu):
    """Smallness threshold A^(-1/mu) * B^(-1/mu^2) forcing Y_i -> 0."""
    return math.exp(-math.log(A) / mu - math.log(B) / mu**2)


@dataclass(frozen=True)
class LogSequence:
    log_values: np.ndarray

    @property
    def values(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)


def iterate_recurrence(rec: GeometricRecurrence, n_steps, mode="equality", seed=0) -> LogSequence:
    """Iterate the recurrence in log space.

    ``equality`` takes Y_{i+1} = sum_k A_k B_k^i Y_i^(1+mu_k); the
    ``inequality_sampler`` mode multiplies every step by an independent
    uniform factor in (0, 1].
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if mode not in ("equality", "inequality_sampler"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed) if mode == "inequality_sampler" else None
    log_a = np.array([math.log(A) for A, _, _ in rec.terms])
    log_b = np.array([math.log(B) for _, B, _ in rec.terms])
    one_plus_mu = np.array([1.0 + mu for _, _, mu in rec.terms])

    out = np.empty(n_steps + 1)
    out[0] = math.log(rec.Y0) if rec.Y0 > 0.0 else -math.inf
    for i in range(n_steps):
        cur = out[i]
        if cur == -math.inf:
            out[i + 1] = -math.inf
            continue
        parts = log_a + i * log_b + one_plus_mu * cur
        top = parts.max()
        if top == math.inf:
            out[i + 1] = math.inf
            continue
        nxt = top + math.log(np.sum(np.exp(parts - top)))
        if rng is not None:
            u = rng.uniform(0.0, 1.0)
            nxt += math.log(u) if u > 0.0 else -math.inf
        out[i + 1] = nxt
    return LogSequence(log_values=out)


@dataclass(frozen=True)
class MultiTermThreshold:
    """Smallness conditions for the multi-term recurrence.

    ``threshold``: explicit sufficient bound
        min_k (m^-1 A_k^-1 B^(-1/mu))^(1/mu_k),  B = max B_k, mu = min mu_k;
    ``predicate_holds``: the sharper condition sum_k A_k Y0^mu_k <= B^(-1/mu)
    evaluated at the recurrence's Y0;
    ``balance_root``: the D > 0 with sum_k A_k D^mu_k = B^(-1/mu), found by
    bisection (a third, diagnostic characterization of smallness).
    """

    threshold: float
    predicate_holds: bool
    balance_root: float


def multi_term_threshold(rec: GeometricRecurrence) -> MultiTermThreshold:
    B = rec.B_max
    mu = rec.mu_min
    m = rec.m
    rhs = B ** (-1.0 / mu)
    thr = min((rhs / (m * A)) ** (1.0 / mu_k) for A, _, mu_k in rec.terms)

    lhs0 = sum(A * rec.Y0**mu_k for A, _, mu_k in rec.terms)
    predicate = lhs0 <= rhs

    def balance(d):
        return sum(A * d**mu_k for A, _, mu_k in rec.terms) - rhs

    lo, hi = 0.0, 1.0
    while balance(hi) < 0.0:
        hi *= 2.0
        if hi > 1e300:
            break
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if balance(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return MultiTermThreshold(threshold=thr, predicate_holds=predicate, balance_root=0.5 * (lo + hi))


def limsup_integral(h, f, g, T, t_end, dt, hprime=None):
    """Evolve y(t) = h(t) * integral_T^t exp(-int_tau^t g) f(tau) dtau and
    compare its tail against the ceiling h*f/g.

    The integrating factor is applied exactly per step with midpoint g,
    which preserves the contraction the bound relies on.  Returns the time
    grid, the y series, tail statistics, and numeric hypothesis flags
    (divergent integral of g; h'/(h g) -> 0).  Hypothesis violations are
    reported, not raised.
    """
    if t_end <= T:
        raise ValueError("t_end must exceed T")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    n = int(math.ceil((t_end - T) / dt))
    ts = T + (t_end - T) * np.arange(n + 1) / n
    step = ts[1] - ts[0]

    fv = np.array([float(f(t)) for t in ts])
    gv = np.array([float(g(t)) for t in ts])
    hv = np.array([float(h(t)) for t in ts])
    if np.any(gv <= 0.0):
        raise ValueError("g must be positive on [T, t_end]")
    if np.any(fv < 0.0):
        raise ValueError("f must be nonnegative on [T, t_end]")

    I = 0.0
    ys = np.empty(n + 1)
    ys[0] = 0.0
    g_int = 0.0
    for k in range(n):
        gm = float(g(0.5 * (ts[k] + ts[k + 1])))
        decay = math.exp(-gm * step)
        I = I * decay + 0.5 * step * (fv[k + 1] + fv[k] * decay)
        ys[k + 1] = hv[k + 1] * I
        g_int += gm * step

    tail = ts >= ts[0] + 0.75 * (ts[-1] - ts[0])
    ceiling = hv * fv / gv
    observed = float(ys[tail].max())
    predicted = float(ceiling[tail].max())

    if hprime is not None:
        hp_end = float(hprime(ts[-1]))
    else:
        eps = 1e-6 * max(1.0, abs(ts[-1]))
        hp_end = (float(h(ts[-1])) - float(h(ts[-1] - eps))) / eps
    ratio_end = abs(hp_end) / (hv[-1] * gv[-1])
    flags = {
        "g_integral": g_int,
        "g_integral_diverging": bool(g_int >= 20.0),
        "h_ratio_at_end": float(ratio_end),
        "h_ratio_vanishing": bool(ratio_end <= 1e-3),
    }
    return {
        "t": ts,
        "y": ys,
        "observed_limsup": observed,
        "predicted_bound": predicted,
        "hypothesis": flags,
    }
