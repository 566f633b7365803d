"""First-order sensitivity of the suspension angles to the initial rotation.

For the symmetric star, d(phi_i)/d(phi) at phi = 0 obeys a three-term linear
recursion whose coefficients depend only on the alpha/x sequences.  If all
these derivatives are distinct, a small enough nonzero phi makes every
suspension angle different, so no accidental alignments appear.

``derivative_sequence`` evaluates the recursion, ``gap_analysis`` looks for
the closest pair, and ``finite_difference_crosscheck`` measures the same
derivatives on the geometric construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .errors import ConstructionError, PreconditionError
from .precision import check_digits, default_digits, guard_tolerance
from .star import StarConfig, alpha_beta_x_sequences, build_star, default_alpha0


@dataclass(frozen=True)
class Coefficients:
    index: int
    a: object
    b: object
    c: object
    sigma: object
    tau: object


def _coefficients(i, seq, R):
    pi = mp.pi
    al, xs = seq.alpha, seq.x
    tau = pi / 6 if i % 2 == 0 else 29 * pi / 42
    ratio = R / xs[i]
    if i % 2 == 1:
        ratio = ratio * mp.sin(pi / 7 + pi / 6) / mp.sin(pi / 6)
    sigma = mp.atan(mp.sin(pi / 7) / (ratio - mp.cos(pi / 7)))
    A = al[i + 1] / 2
    t_a = mp.tan(A)
    t_as = mp.tan(A - sigma)
    tol = guard_tolerance(seq.digits)
    if abs(t_as) <= tol or abs(mp.cos(A)) <= tol:
        raise ConstructionError("coefficient singular (tangent at 0 or infinity)", layer=i, step="coefficients")
    b = -t_a / t_as
    a = -t_a * (
        mp.sin(pi / 7 + sigma) * mp.sin(pi / 7 + sigma + tau) / mp.sin(tau)
        + (mp.mpf(1) / 2 - mp.sin(tau + 2 * pi / 7 + 2 * sigma) / (2 * mp.sin(tau))) / t_as
    )
    if al[i] > pi:
        c = mp.mpf(-1)
    else:
        h = 2 * mp.cos(al[i] / 2)
        if abs(1 - h) <= tol:
            raise ConstructionError("coefficient c singular", layer=i, step="coefficients")
        c = h / (1 - h)
    return Coefficients(i, a, b, c, sigma, tau)


def coefficients(n: int, alpha0=None, digits: int | None = None) -> list:
    """(a_i, b_i, c_i) for i = 0..n-1, at ``digits`` digits."""
    digits = digits or default_digits()
    seq = alpha_beta_x_sequences(n, alpha0, digits)
    with mp.workdps(digits):
        a0 = default_alpha0() if alpha0 is None else mp.mpf(alpha0)
        R = mp.sin(a0 / 2) / mp.sin(mp.pi / 7 + a0 / 2)
        return [_coefficients(i, seq, R) for i in range(n)]


@dataclass(frozen=True)
class DerivativeSequence:
    phi: list  # d(phi_i)/d(phi), i = 0..n
    psi: list
    gamma: list
    digits: int
    work_digits: int


def derivative_sequence(n: int, alpha0=None, digits: int | None = None, extra_digits: int | None = None) -> DerivativeSequence:
    """phi'_0..phi'_n with phi'_0 = 1, psi'_0 = 1/2 - sin(pi/6 - alpha0).

    Recursion: gamma'_i = c_i psi'_i, psi'_{i+1} = b_i gamma'_i + a_i phi'_i,
    phi'_{i+1} = phi'_i + gamma'_i + psi'_{i+1}.  Runs with ``extra_digits``
    of headroom (default: as many as ``digits``) and rounds the results back.
    Pass ``extra_digits=0`` to run at exactly ``digits``.
    """
    digits = digits or default_digits()
    check_digits(digits)
    extra = digits if extra_digits is None else extra_digits
    work = digits + extra
    coeffs = coefficients(n, alpha0, work)
    with mp.workdps(work):
        a0 = default_alpha0() if alpha0 is None else mp.mpf(alpha0)
        phi = [mp.mpf(1)]
        psi = [mp.mpf(1) / 2 - mp.sin(mp.pi / 6 - a0)]
        gam = []
        for cf in coeffs:
            gi = cf.c * psi[-1]
            gam.append(gi)
            ps = cf.b * gi + cf.a * phi[-1]
            psi.append(ps)
            phi.append(phi[-1] + gi + ps)
    with mp.workdps(digits):
        rnd = lambda xs: [+x for x in xs]  # noqa: E731
        return DerivativeSequence(rnd(phi), rnd(psi), rnd(gam), digits, work)


@dataclass(frozen=True)
class GapReport:
    min_gap: object
    pair: tuple
    min_gap_even: object
    pair_even: tuple
    min_gap_odd: object
    pair_odd: tuple
    slope: float  # least-squares slope of log10|phi'_i| against i
    intercept: float
    magnitude_decreases: tuple  # i with |phi'_{i+1}| < |phi'_i|
    value_decreases: tuple  # i with phi'_{i+1} < phi'_i

    def to_json(self, digits: int = 15) -> dict:
        s = lambda x: mp.nstr(x, digits)  # noqa: E731
        return {
            "min_gap": s(self.min_gap),
            "pair": list(self.pair),
            "min_gap_even": s(self.min_gap_even),
            "pair_even": list(self.pair_even),
            "min_gap_odd": s(self.min_gap_odd),
            "pair_odd": list(self.pair_odd),
            "log10_slope": self.slope,
            "log10_intercept": self.intercept,
            "magnitude_decreases": list(self.magnitude_decreases),
            "value_decreases": list(self.value_decreases),
        }


def _closest_pair(values, indices):
    # The closest pair of reals is adjacent after sorting.
    order = sorted(indices, key=lambda i: values[i])
    best = None
    for i, j in zip(order, order[1:]):
        d = abs(values[j] - values[i])
        if best is None or d < best[0]:
            best = (d, tuple(sorted((i, j))))
    if best is None:
        return None, ()
    return best


def gap_analysis(seq: DerivativeSequence | list) -> GapReport:
    """Smallest |phi'_i - phi'_j| overall and within each parity class, plus growth statistics."""
    vals = seq.phi if isinstance(seq, DerivativeSequence) else list(seq)
    if len(vals) < 2:
        raise PreconditionError("need at least two terms")
    digits = seq.digits if isinstance(seq, DerivativeSequence) else mp.mp.dps
    with mp.workdps(digits):
        idx = range(len(vals))
        g_all, p_all = _closest_pair(vals, idx)
        g_even, p_even = _closest_pair(vals, [i for i in idx if i % 2 == 0])
        g_odd, p_odd = _closest_pair(vals, [i for i in idx if i % 2 == 1])
        pts = [(i, float(mp.log10(abs(v)))) for i, v in enumerate(vals) if v != 0]
        n = len(pts)
        mx = sum(p[0] for p in pts) / n
        my = sum(p[1] for p in pts) / n
        sxx = sum((p[0] - mx) ** 2 for p in pts)
        slope = sum((p[0] - mx) * (p[1] - my) for p in pts) / sxx if sxx else math.nan
        inter = my - slope * mx
        mag = tuple(i for i in range(len(vals) - 1) if abs(vals[i + 1]) < abs(vals[i]))
        val = tuple(i for i in range(len(vals) - 1) if vals[i + 1] < vals[i])
        return GapReport(g_all, p_all, g_even, p_even, g_odd, p_odd, slope, inter, mag, val)


@dataclass(frozen=True)
class FDReport:
    h: object
    n: int
    estimates: list
    analytic: list
    deviations: list  # |estimate - analytic| / max(1, |analytic|)

    @property
    def max_deviation(self):
        return max(self.deviations)


def measured_phis(n: int, phi, digits: int, alpha0=None) -> list:
    state = build_star(StarConfig(n=n, phi=phi, alpha0=alpha0, digits=digits))
    return state.phis


def finite_difference_crosscheck(n: int, h, digits: int | None = None, alpha0=None) -> FDReport:
    """Central differences of the measured suspension angles against the recursion.

    Deviations are relative to max(1, |phi'_i|).  Higher derivatives grow with
    i as fast as the first ones, so h has to shrink with n; see
    ``fd_convergence`` for a halving test.
    """
    digits = digits or default_digits()
    with mp.workdps(digits + 10):
        h = mp.mpf(h)
        plus = measured_phis(n, h, digits, alpha0)
        minus = measured_phis(n, -h, digits, alpha0)
        ana = derivative_sequence(n, alpha0, digits).phi
        est = [(p - m) / (2 * h) for p, m in zip(plus, minus)]
        dev = [abs(e - a) / max(mp.mpf(1), abs(a)) for e, a in zip(est, ana)]
        return FDReport(h, n, est, ana, dev)


def fd_convergence(n: int, h, digits: int | None = None, alpha0=None) -> dict:
    """Max deviation at h and h/2; a ratio near 4 shows second-order agreement."""
    digits = digits or default_digits()
    r1 = finite_difference_crosscheck(n, h, digits, alpha0)
    with mp.workdps(digits + 10):
        r2 = finite_difference_crosscheck(n, r1.h / 2, digits, alpha0)
        ratio = r1.max_deviation / r2.max_deviation if r2.max_deviation else mp.inf
    return {"h": r1.h, "dev_h": r1.max_deviation, "dev_h2": r2.max_deviation, "ratio": ratio}
