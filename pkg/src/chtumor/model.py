"""Model data: rate constants, configuration potentials, proliferation switch.

The double-well potential psi is carried together with its decomposition
psi'(r) = beta(r) - lam*r into a monotone part and a linear perturbation,
plus the coercivity metadata (kappa_beta, p_beta, C_beta) needed to certify
superquadratic growth.  The proliferation function h is a C^1 monotone
switch equal to 1 in the tumor phase, 0 at the pure healthy phase, and
-h_star below the plateau onset phi_star.

``check_dissipativity`` evaluates the parameter compatibility conditions
under which trajectories admit a bounded absorbing set, and, when they
hold, produces the slack epsilon, the settling time t1 and the long-time
nutrient envelope limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Params",
    "Potential",
    "Proliferation",
    "DissipativityCert",
    "make_quartic_potential",
    "make_demo_potential",
    "make_polynomial_double_well",
    "make_proliferation",
    "check_dissipativity",
    "admissible_epsilon_sup",
    "absorption_time",
    "envelope_upper",
    "envelope_lower",
]


@dataclass(frozen=True)
class Params:
    """Rate constants of the coupled system.

    P proliferation, A apoptosis, B nutrient supply, C nutrient consumption,
    sigma_s the nutrient level of the pre-existing vasculature.
    """

    P: float
    A: float
    B: float
    C: float
    sigma_s: float

    def __post_init__(self):
        for name in ("P", "A", "B", "C"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not math.isfinite(v) or v <= 0.0:
                raise ConfigurationError(f"rate constant {name} must be positive, got {v}")
        s = float(self.sigma_s)
        object.__setattr__(self, "sigma_s", s)
        if not 0.0 < s < 1.0:
            raise ConfigurationError(f"sigma_s must lie in (0, 1), got {s}")


@dataclass(frozen=True)
class Potential:
    """Configuration potential psi with monotone decomposition.

    psi'(r) = beta(r) - lam*r with beta(0) = 0 and beta nondecreasing;
    beta_hat is the antiderivative of beta vanishing at 0.  Builtin kinds
    are normalized so min psi = 0.  The growth metadata certifies
    |beta(r)| <= c_beta*(1 + psi(r)) and
    beta(r)*sign(r) >= kappa_beta*|r|**p_beta - C_beta.
    ``ell`` records liminf psi(r)/|r| at infinity (not enforced).
    """

    kind: str
    lam: float
    psi: Callable[[np.ndarray], np.ndarray]
    psi_prime: Callable[[np.ndarray], np.ndarray]
    beta: Callable[[np.ndarray], np.ndarray]
    beta_hat: Callable[[np.ndarray], np.ndarray]
    p_beta: float | None
    kappa_beta: float | None
    C_beta: float | None
    c_beta: float | None
    ell: float = math.inf

    def __post_init__(self):
        if self.lam < 0.0:
            raise ConfigurationError(f"linear-perturbation coefficient must be >= 0, got {self.lam}")


def make_quartic_potential() -> Potential:
    """Standard double well psi(r) = (r^2 - 1)^2 / 4 with wells at +-1."""
    return Potential(
        kind="quartic",
        lam=1.0,
        psi=lambda r: 0.25 * (np.asarray(r, dtype=np.float64) ** 2 - 1.0) ** 2,
        psi_prime=lambda r: np.asarray(r, dtype=np.float64) ** 3 - np.asarray(r, dtype=np.float64),
        beta=lambda r: np.asarray(r, dtype=np.float64) ** 3,
        beta_hat=lambda r: 0.25 * np.asarray(r, dtype=np.float64) ** 4,
        p_beta=3.0,
        kappa_beta=1.0,
        C_beta=0.0,
        c_beta=3.0,
        ell=math.inf,
    )


def _demo_psi(r):
    r = np.asarray(r, dtype=np.float64)
    a = np.abs(r)
    return np.select(
        [a <= 0.5, (r > 0.5) & (r < 2.0), (r < -0.5) & (r > -2.0)],
        [0.5 - r * r, (r - 1.0) ** 2, (r + 1.0) ** 2],
        default=2.0 * a - 3.0,
    )


def _demo_psi_prime(r):
    r = np.asarray(r, dtype=np.float64)
    a = np.abs(r)
    return np.select(
        [a <= 0.5, (r > 0.5) & (r < 2.0), (r < -0.5) & (r > -2.0)],
        [-2.0 * r, 2.0 * (r - 1.0), 2.0 * (r + 1.0)],
        default=2.0 * np.sign(r),
    )


def _demo_beta(r):
    # psi' + 2r, branch by branch
    r = np.asarray(r, dtype=np.float64)
    a = np.abs(r)
    return np.select(
        [a <= 0.5, (r > 0.5) & (r < 2.0), (r < -0.5) & (r > -2.0)],
        [np.zeros_like(r), 4.0 * r - 2.0, 4.0 * r + 2.0],
        default=2.0 * np.sign(r) + 2.0 * r,
    )


def _demo_beta_hat(r):
    t = np.abs(np.asarray(r, dtype=np.float64))
    return np.select(
        [t <= 0.5, t < 2.0],
        [np.zeros_like(t), 2.0 * t * t - 2.0 * t + 0.5],
        default=t * t + 2.0 * t - 3.5,
    )


def make_demo_potential() -> Potential:
    """Piecewise potential with only linear growth at infinity.

    Satisfies the general assumptions with lam = 2, but its monotone part
    grows linearly (p_beta = 1), so the superquadratic condition fails and
    a certificate built on it is negative by design.
    """
    return Potential(
        kind="piecewise_demo",
        lam=2.0,
        psi=_demo_psi,
        psi_prime=_demo_psi_prime,
        beta=_demo_beta,
        beta_hat=_demo_beta_hat,
        p_beta=1.0,
        kappa_beta=1.0,
        C_beta=1.0,
        c_beta=4.0,
        ell=2.0,
    )


def make_polynomial_double_well(scale: float, well: float) -> Potential:
    """Custom quartic psi(r) = scale/4 * (r^2 - well^2)^2.

    beta(r) = scale*r^3 and lam = scale*well^2.  Exercises the sampled
    coercivity path of ``check_dissipativity`` (kind "custom").
    """
    scale = float(scale)
    well = float(well)
    if scale <= 0.0 or well <= 0.0:
        raise ConfigurationError("polynomial double well needs scale > 0 and well > 0")
    # max of |beta|/(1+psi) is attained near r ~ well; bound it by sampling once
    r = np.linspace(-10.0 * well, 10.0 * well, 4001)
    c_beta = float(np.max(np.abs(scale * r**3) / (1.0 + scale / 4.0 * (r * r - well * well) ** 2))) * 1.05
    return Potential(
        kind="custom",
        lam=scale * well * well,
        psi=lambda x: scale / 4.0 * (np.asarray(x, dtype=np.float64) ** 2 - well * well) ** 2,
        psi_prime=lambda x: scale * (np.asarray(x, dtype=np.float64) ** 3 - well * well * np.asarray(x, dtype=np.float64)),
        beta=lambda x: scale * np.asarray(x, dtype=np.float64) ** 3,
        beta_hat=lambda x: scale / 4.0 * np.asarray(x, dtype=np.float64) ** 4,
        p_beta=3.0,
        kappa_beta=scale,
        C_beta=0.0,
        c_beta=c_beta,
        ell=math.inf,
    )


def _smoothstep(u):
    return u * u * (3.0 - 2.0 * u)


def _smoothstep_prime(u):
    return 6.0 * u * (1.0 - u)


@dataclass(frozen=True)
class Proliferation:
    """C^1 monotone proliferation switch.

    h(r) = 1 for r >= 1, h(-1) = 0, and h(r) = -h_star for r <= phi_star.
    The joins use the cubic smoothstep 3u^2 - 2u^3, whose zero end slopes
    make the pieces match in value and derivative.
    """

    h_star: float
    phi_star: float

    def __post_init__(self):
        hs = float(self.h_star)
        ps = float(self.phi_star)
        object.__setattr__(self, "h_star", hs)
        object.__setattr__(self, "phi_star", ps)
        if hs < 0.0:
            raise ConfigurationError(f"plateau depth h_star must be >= 0, got {hs}")
        if ps > -1.0:
            raise ConfigurationError(f"plateau onset phi_star must be <= -1, got {ps}")
        if hs > 0.0 and ps >= -1.0:
            raise ConfigurationError("h_star > 0 requires phi_star < -1 (h(-1) = 0 must hold)")

    def _h_scalar(self, r: float) -> float:
        if r >= 1.0:
            return 1.0
        if r >= -1.0:
            return _smoothstep(0.5 * (r + 1.0))
        if self.h_star == 0.0:
            return 0.0
        if r <= self.phi_star:
            return -self.h_star
        u = (r - self.phi_star) / (-1.0 - self.phi_star)
        return self.h_star * (_smoothstep(u) - 1.0)

    def _h_prime_scalar(self, r: float) -> float:
        if r >= 1.0:
            return 0.0
        if r >= -1.0:
            return 0.5 * _smoothstep_prime(0.5 * (r + 1.0))
        if self.h_star == 0.0 or r <= self.phi_star:
            return 0.0
        width = -1.0 - self.phi_star
        return self.h_star * _smoothstep_prime((r - self.phi_star) / width) / width

    def h(self, r):
        if np.ndim(r) == 0:
            return self._h_scalar(float(r))
        r = np.asarray(r, dtype=np.float64)
        out = np.empty_like(r)
        upper = r >= 1.0
        mid = (r >= -1.0) & ~upper
        out[upper] = 1.0
        out[mid] = _smoothstep(0.5 * (r[mid] + 1.0))
        low = ~(upper | mid)
        if self.h_star == 0.0:
            out[low] = 0.0
        else:
            width = -1.0 - self.phi_star
            u = np.clip((r[low] - self.phi_star) / width, 0.0, 1.0)
            out[low] = self.h_star * (_smoothstep(u) - 1.0)
        return out

    def h_prime(self, r):
        if np.ndim(r) == 0:
            return self._h_prime_scalar(float(r))
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros_like(r)
        mid = (r >= -1.0) & (r < 1.0)
        out[mid] = 0.5 * _smoothstep_prime(0.5 * (r[mid] + 1.0))
        if self.h_star > 0.0:
            width = -1.0 - self.phi_star
            ramp = (r > self.phi_star) & (r < -1.0)
            out[ramp] = self.h_star * _smoothstep_prime((r[ramp] - self.phi_star) / width) / width
        return out


def make_proliferation(h_star: float, phi_star: float) -> Proliferation:
    """Build the canonical smoothstep proliferation switch."""
    return Proliferation(h_star=h_star, phi_star=phi_star)


@dataclass(frozen=True)
class DissipativityCert:
    """Outcome of the parameter compatibility checks.

    Condition flags:
      has_plateau_margin     h_star > 0 and B - C*h_star > 0
      limit_below_one        B*sigma_s / (B - C*h_star) < 1
      apoptosis_margin       A - P*B*sigma_s / (B - C*h_star) > 0
      superquadratic         beta grows faster than quadratically (p_beta > 2)

    When all hold, ``epsilon_max`` is the largest slack compatible with the
    two inequalities 2*eps <= A - P*U and U + eps/P < 1 (U the upper
    envelope limit), ``epsilon`` is half of it (floating-point margin), and
    ``t1`` is the settling time after which the nutrient is confined to
    [lower - eps/P, upper + eps/P], evaluated at ``epsilon``.
    """

    has_plateau_margin: bool
    limit_below_one: bool
    apoptosis_margin: bool
    superquadratic: bool
    sigma_upper_limit: float | None
    sigma_lower_limit: float
    epsilon: float | None = None
    epsilon_max: float | None = None
    t1: float | None = None

    @property
    def satisfied(self) -> bool:
        return (self.has_plateau_margin and self.limit_below_one
                and self.apoptosis_margin and self.superquadratic)


def _coercivity_holds_sampled(pot: Potential, r_max: float = 100.0, samples: int = 20001) -> bool:
    if pot.p_beta is None or pot.kappa_beta is None or pot.C_beta is None:
        return False
    r = np.linspace(-r_max, r_max, samples)
    lhs = np.asarray(pot.beta(r)) * np.sign(r)
    rhs = pot.kappa_beta * np.abs(r) ** pot.p_beta - pot.C_beta
    return bool(np.all(lhs >= rhs - 1e-9 * (1.0 + np.abs(rhs))))


def admissible_epsilon_sup(params: Params, prolif: Proliferation) -> float:
    """Supremum of slacks eps satisfying 2*eps <= A - P*U and U + eps/P < 1."""
    upper = params.B * params.sigma_s / (params.B - params.C * prolif.h_star)
    return min(0.5 * (params.A - params.P * upper), params.P * (1.0 - upper))


def absorption_time(params: Params, prolif: Proliferation, epsilon: float) -> float:
    """Time after which both nutrient envelopes are within eps/P of their limits.

    t1 = max over the two envelope rates of log(gap * rate-factor / eps)
    divided by the rate, clamped at zero.  Requires B - C*h_star > B*sigma_s
    (the upper limit below one) and epsilon > 0.
    """
    if epsilon <= 0.0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    bch = params.B - params.C * prolif.h_star
    if bch <= 0.0:
        raise ConfigurationError("absorption time needs B - C*h_star > 0")
    if bch <= params.B * params.sigma_s:
        raise ConfigurationError("absorption time needs B*sigma_s/(B - C*h_star) < 1")
    rate_lo = params.B + params.C
    arg_lo = params.B * params.sigma_s * params.P / (epsilon * rate_lo)
    arg_hi = params.P * (bch - params.B * params.sigma_s) / (epsilon * bch)
    t_lo = math.log(arg_lo) / rate_lo if arg_lo > 0.0 else -math.inf
    t_hi = math.log(arg_hi) / bch if arg_hi > 0.0 else -math.inf
    return max(t_lo, t_hi, 0.0)


def check_dissipativity(params: Params, pot: Potential, prolif: Proliferation) -> DissipativityCert:
    """Evaluate the four compatibility conditions and derive (eps, t1).

    The envelope limits B*sigma_s/(B - C*h_star) and B*sigma_s/(B + C) are
    always reported (the upper one is None when B = C*h_star exactly).
    For builtin potentials the superquadratic condition is certified from
    the stored metadata; custom potentials are additionally spot checked by
    dense sampling on [-100, 100].
    """
    bch = params.B - params.C * prolif.h_star
    lower = params.B * params.sigma_s / (params.B + params.C)
    upper = params.B * params.sigma_s / bch if bch != 0.0 else None

    plateau = prolif.h_star > 0.0 and bch > 0.0
    limit_ok = plateau and upper is not None and upper < 1.0
    apoptosis = plateau and upper is not None and (params.A - params.P * upper) > 0.0
    superq = pot.p_beta is not None and pot.p_beta > 2.0
    if superq and pot.kind == "custom":
        superq = _coercivity_holds_sampled(pot)

    epsilon = epsilon_max = t1 = None
    if plateau and limit_ok and apoptosis and superq:
        epsilon_max = admissible_epsilon_sup(params, prolif)
        epsilon = 0.5 * epsilon_max
        t1 = absorption_time(params, prolif, epsilon)

    return DissipativityCert(
        has_plateau_margin=plateau,
        limit_below_one=limit_ok,
        apoptosis_margin=apoptosis,
        superquadratic=superq,
        sigma_upper_limit=upper,
        sigma_lower_limit=lower,
        epsilon=epsilon,
        epsilon_max=epsilon_max,
        t1=t1,
    )


def envelope_upper(params: Params, prolif: Proliferation, t):
    """Supersolution envelope: decays from 1 toward B*sigma_s/(B - C*h_star).

    Solves S' = -(B - C*h_star) S + B*sigma_s, S(0) = 1; requires
    B - C*h_star > 0 (otherwise the formula's sign structure flips and the
    bound is meaningless).
    """
    rate = params.B - params.C * prolif.h_star
    if rate <= 0.0:
        raise ConfigurationError("upper envelope needs B - C*h_star > 0")
    t = np.asarray(t, dtype=np.float64)
    limit = params.B * params.sigma_s / rate
    decay = np.exp(-rate * t)
    out = decay + limit * (1.0 - decay)
    return float(out) if out.ndim == 0 else out


def envelope_lower(params: Params, t):
    """Subsolution envelope: grows from 0 toward B*sigma_s/(B + C).

    Solves S' = -(B + C) S + B*sigma_s, S(0) = 0.
    """
    rate = params.B + params.C
    t = np.asarray(t, dtype=np.float64)
    out = (params.B * params.sigma_s / rate) * (1.0 - np.exp(-rate * t))
    return float(out) if out.ndim == 0 else out
