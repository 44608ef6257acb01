"""Linear-elasticity coefficient tensors and their admissible-exponent
constants.

The elasticity operator with moduli (lam, mu) admits a one-parameter family
of divergence-form rewrites indexed by r; the tensor is

    A[h,k,a,b] = mu d_hk d_ab + (lam + r) d_ha d_kb + (mu - r) d_hb d_ka,

with m = n and the symmetry A[h,k,a,b] = A[k,h,b,a] for every real r.
The best constant C(n, lam, mu) bounding (1 - 2/p)^2 from above is known
in closed form for n = 2 and bracketed for n >= 3; the lower bound comes
from optimizing the rewrite parameter, whose reduced variable x = gamma/mu
(gamma = mu - r) solves a cubic with the trivial root x = -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .prange import PRange
from .tensors import CoefficientTensor

SQRT8 = math.sqrt(8.0)
POISSON_LIMIT = 0.396


def _check_moduli(lam: float, mu: float):
    if not (mu > 0.0 and lam + 2.0 * mu > 0.0):
        raise InputError(f"need mu > 0 and lam + 2 mu > 0, got lam={lam}, mu={mu}")


@dataclass(frozen=True)
class LameParams:
    """Constant or sampled moduli; every sample must satisfy mu > 0 and
    lam + 2 mu > 0."""

    lam: np.ndarray
    mu: np.ndarray
    n: int

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if lam.shape != mu.shape:
            raise InputError("lam and mu samples must share a shape")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(mu))):
            raise InputError("moduli must be finite")
        if not (np.all(mu > 0.0) and np.all(lam + 2.0 * mu > 0.0)):
            raise InputError("every sample needs mu > 0 and lam + 2 mu > 0")
        if self.n < 2:
            raise InputError("dimension must be >= 2")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @property
    def is_constant(self) -> bool:
        return self.lam.size == 1


def lame_tensor(lam: float, mu: float, r: float, n: int) -> CoefficientTensor:
    """Elasticity tensor for the rewrite parameter r (m = n; r = 0 is the
    plain divergence form). Real and pairing-symmetric for all real r."""
    _check_moduli(lam, mu)
    if n < 2:
        raise InputError("dimension must be >= 2")
    d = np.eye(n)
    entries = (
        mu * np.einsum("hk,ab->hkab", d, d)
        + (lam + r) * np.einsum("ha,kb->hkab", d, d)
        + (mu - r) * np.einsum("hb,ka->hkab", d, d)
    )
    return CoefficientTensor(entries.astype(complex))


def necessary_constant(n: int, lam: float, mu: float) -> float:
    """Upper bound 1 - ((lam+mu)/(lam+3mu))^2, dimension independent."""
    _check_moduli(lam, mu)
    return 1.0 - ((lam + mu) / (lam + 3.0 * mu)) ** 2


def cubic_coefficients(n: int, a: float) -> tuple[float, float, float, float]:
    """Coefficients (c3, c2, c1, c0) of the rewrite-parameter cubic in
    x = gamma/mu, with a = lam/mu."""
    if n < 3:
        raise InputError("the cubic applies for n >= 3")
    c3 = (n - 2.0) / (n - 1.0)
    c2 = 1.0 / (a + 2.0) - a - n / (n - 1.0)
    c1 = -2.0 * (a + 1.0) / (a + 2.0)
    c0 = (a + 1.0) ** 2 / (a + 2.0)
    return c3, c2, c1, c0


def cubic_residual(n: int, a: float, x: float) -> float:
    c3, c2, c1, c0 = cubic_coefficients(n, a)
    return abs(((c3 * x + c2) * x + c1) * x + c0)


def lame_cubic_roots(n: int, lam: float, mu: float) -> tuple[float, float, float]:
    """The three roots (-1, x_minus, x_plus) of the rewrite-parameter cubic.

    x = -1 is always a root; the other two come from the deflated quadratic,

        x_pm = (n-1)/(2(n-2)) * (lam+mu)/(mu(lam+2mu))
               * [ (lam+3mu) +- sqrt((lam+mu)^2 + 4mu(lam+2mu)/(n-1)) ].
    """
    _check_moduli(lam, mu)
    if n < 3:
        raise InputError("the cubic applies for n >= 3")
    disc = (lam + mu) ** 2 + 4.0 * mu * (lam + 2.0 * mu) / (n - 1.0)
    assert disc > 0.0  # guaranteed by mu > 0, lam + 2mu > 0
    root = math.sqrt(disc)
    pref = (n - 1.0) / (2.0 * (n - 2.0)) * (lam + mu) / (mu * (lam + 2.0 * mu))
    x_minus = pref * ((lam + 3.0 * mu) - root)
    x_plus = pref * ((lam + 3.0 * mu) + root)
    return (-1.0, x_minus, x_plus)


@dataclass(frozen=True)
class LameSufficiency:
    """Bracket [C_lower, C_upper] for the admissibility constant together
    with the optimizing rewrite parameters."""

    c_lower: float
    c_upper: float
    gamma_star: float
    r_star: float
    branch: str
    p_interval: PRange

    def __post_init__(self):
        if not (0.0 <= self.c_lower <= self.c_upper + 1e-12 and self.c_upper <= 1.0 + 1e-12):
            raise InputError("need 0 <= C_lower <= C_upper <= 1")


def _lh_term(n: int, lam: float, mu: float, gamma: float) -> Optional[float]:
    """Second branch of the min defining the lower bound; None when the
    gamma constraints fail."""
    if n == 2:
        den = (lam + 2.0 * mu) ** 2
        return 1.0 - (lam + mu - gamma) ** 2 / den
    if not gamma < ((n - 1.0) * lam + n * mu) / (n - 2.0):
        return None
    den = (lam + 2.0 * mu) * (lam + mu - gamma + (mu + gamma) / (n - 1.0))
    if den <= (lam + mu - gamma) ** 2:
        return None
    return 1.0 - (lam + mu - gamma) ** 2 / den


def sufficient_constant(n: int, lam: float, mu: float) -> LameSufficiency:
    """Best known lower bound on C(n, lam, mu) and the rewrite achieving it.

    n = 2 admits the exact constant 1 - ((lam+mu)/(lam+3mu))^2 (necessary =
    sufficient); n >= 3 takes the max of the dimension-independent bound
    1 - ((lam+mu)/max(mu, lam+2mu))^2 and the cubic-root bound, each valid
    only where its gamma constraints hold. The reported interval is open.
    """
    _check_moduli(lam, mu)
    c_upper = necessary_constant(n, lam, mu)
    if n == 2:
        gamma = mu * (lam + mu) / (lam + 3.0 * mu)
        c = c_upper
        branch = "n2"
    else:
        cands = []
        # limit form of the merged two-case bound (open-interval semantics)
        gamma_dim = mu * (lam + mu) / (lam + 2.0 * mu) if lam + mu >= 0.0 else lam + mu
        c_dim = 1.0 - ((lam + mu) / max(mu, lam + 2.0 * mu)) ** 2
        cands.append((c_dim, gamma_dim, "case1" if lam + mu < 0.0 else "dim-independent"))
        for x in lame_cubic_roots(n, lam, mu)[1:]:
            if abs(x) >= 1.0:
                continue
            gamma = x * mu
            lh = _lh_term(n, lam, mu, gamma)
            if lh is None:
                continue
            cands.append((min(1.0 - x * x, lh), gamma, "cubic"))
        c, gamma, branch = max(cands, key=lambda item: item[0])
        c = min(c, c_upper)
    bound = math.sqrt(max(c, 0.0))
    interval = PRange(-bound, bound) if c > 0.0 else PRange(empty=True)
    return LameSufficiency(
        c_lower=c,
        c_upper=c_upper,
        gamma_star=gamma,
        r_star=mu - gamma,
        branch=branch,
        p_interval=interval,
    )


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    lower_combination: float   # min over samples of (sqrt8 - 1) mu + lam
    upper_combination: float   # min over samples of (sqrt8 + 1) mu - lam
    mu0: float
    poisson_ratio: Optional[float]
    poisson_ok: Optional[bool]


def admissibility(lam, mu, mu0: float) -> AdmissibilityReport:
    """Check ess-inf{(sqrt8 - 1) mu + lam, (sqrt8 + 1) mu - lam} >= mu0
    and report the Poisson ratio nu = lam/(2(lam+mu)) against 0.396.

    For sampled moduli the Poisson predicate uses the worst (largest) ratio;
    it is reported as undefined when lam + mu = 0 anywhere.
    """
    if not mu0 > 0.0:
        raise InputError("mu0 must be positive")
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if lam.shape != mu.shape:
        raise InputError("lam and mu samples must share a shape")
    lo = float(np.min((SQRT8 - 1.0) * mu + lam))
    hi = float(np.min((SQRT8 + 1.0) * mu - lam))
    if np.any(lam + mu == 0.0):
        nu, nu_ok = None, None
    else:
        ratios = lam / (2.0 * (lam + mu))
        nu = float(ratios[np.argmax(ratios)])
        nu_ok = bool(nu < POISSON_LIMIT)
    return AdmissibilityReport(
        admissible=bool(min(lo, hi) >= mu0),
        lower_combination=lo,
        upper_combination=hi,
        mu0=mu0,
        poisson_ratio=nu,
        poisson_ok=nu_ok,
    )


@dataclass(frozen=True)
class OscillationReport:
    max_sum: float
    passes: bool
    lonely_points: tuple
    per_point: np.ndarray


def oscillation_scan(lam, mu, points, delta, K: float) -> OscillationReport:
    """Lattice scan of osc(lam) + osc(mu) over balls B(x, delta(x)/2).

    Oscillation of a sample set is max - min over lattice points inside the
    ball (always including the center), an under-approximation of the true
    oscillation. Points whose ball contains no other lattice point are
    flagged and contribute zero.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    delta = np.asarray(delta, dtype=float)
    S = pts.shape[0]
    if not (lam.shape == mu.shape == (S,) and delta.shape == (S,)):
        raise InputError("lam, mu, delta must be per-point arrays matching points")
    if np.any(delta <= 0.0):
        raise InputError("delta must be positive")
    sums = np.empty(S)
    lonely = []
    for i in range(S):
        dist = np.linalg.norm(pts - pts[i], axis=1)
        inside = dist <= delta[i] / 2.0
        if np.count_nonzero(inside) <= 1:
            lonely.append(i)
            sums[i] = 0.0
            continue
        osc_l = float(lam[inside].max() - lam[inside].min())
        osc_m = float(mu[inside].max() - mu[inside].min())
        sums[i] = osc_l + osc_m
    max_sum = float(sums.max())
    return OscillationReport(
        max_sum=max_sum,
        passes=bool(max_sum <= K),
        lonely_points=tuple(lonely),
        per_point=sums,
    )


def dissipativity_bounds(lam: float, mu: float) -> tuple[float, float]:
    """Constant-coefficient comparison pair (squared bound, plain bound):
    1 - ((lam+mu)/M)^2 and 1 - |lam+mu|/M with M = max(mu, lam+2mu).

    The first is never smaller on the admissible set, strictly larger when
    0 < |lam+mu| < M.
    """
    _check_moduli(lam, mu)
    M = max(mu, lam + 2.0 * mu)
    s = (lam + mu) / M
    return 1.0 - s * s, 1.0 - abs(s)
