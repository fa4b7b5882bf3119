"""Standardized elliptical radial families.

Three families are supported, each written so that the standardized distance
``d`` has median one:

* ``gaussian``: f1(r) = exp(-a r^2 / 2), d^2 a ~ chi2_k
* ``t:<nu>``:   f1(r) = (1 + a r^2 / nu)^(-(k+nu)/2), d^2 a / k ~ F(k, nu)
* ``e:<eta>``:  f1(r) = exp(-b r^(2 eta)), d^(2 eta) b ~ Gamma(k / (2 eta))

where ``a`` / ``b`` is the standardizing constant fixed by the median condition.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
import math
import warnings

import numpy as np
from scipy import integrate, special

from . import matops
from .errors import ConvergenceError, DomainError, InfiniteMomentError, ParseError

KINDS = ("gaussian", "student", "powerexp")

# Breakpoints for integrals over (0, 1) whose integrands blow up at u -> 1.
_UNIT_POINTS = (0.5, 0.9, 0.99, 0.999, 0.9999)


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0.0)) or np.any(~(u < 1.0)):
        raise DomainError("probability argument must lie strictly inside (0, 1)")
    return u


def dist_quantile(dist, u, *params):
    """Quantile of ``chi2`` (df), ``f`` (df1, df2) or ``gamma`` (shape, unit rate)."""
    u = _check_u(u)
    if any(not p > 0 for p in params):
        raise DomainError(f"distribution parameters must be positive, got {params}")
    if dist == "chi2":
        (df,) = params
        x = 2.0 * special.gammaincinv(df / 2.0, u)
    elif dist == "f":
        d1, d2 = params
        x = special.fdtri(d1, d2, u)
    elif dist == "gamma":
        (shape,) = params
        x = special.gammaincinv(shape, u)
    else:
        raise DomainError(f"unknown distribution {dist!r}")
    if np.any(np.isnan(x)):
        raise ConvergenceError(f"{dist} quantile solver failed for params {params}")
    return x if np.ndim(x) else float(x)


def dist_cdf(dist, x, *params):
    x = np.asarray(x, dtype=float)
    if dist == "chi2":
        return special.gammainc(params[0] / 2.0, x / 2.0)
    if dist == "f":
        return special.fdtr(params[0], params[1], x)
    if dist == "gamma":
        return special.gammainc(params[0], x)
    raise DomainError(f"unknown distribution {dist!r}")


@lru_cache(maxsize=None)
def standardize_constant(kind, param, k):
    """a_k, a_{k,nu} or b_{k,eta}: the constant that makes the median distance 1."""
    if kind == "gaussian":
        return dist_quantile("chi2", 0.5, k)
    if kind == "student":
        return k * dist_quantile("f", 0.5, k, param)
    if kind == "powerexp":
        return dist_quantile("gamma", 0.5, k / (2.0 * param))
    raise DomainError(f"unknown family kind {kind!r}")


@dataclass(frozen=True)
class DensitySummary:
    Dk: float
    Ek: float
    kappa: float
    Jk: float
    Ik: float


@dataclass(frozen=True)
class RadialFamily:
    """A standardized radial density in dimension ``k``.

    ``param`` is nu for ``student``, eta for ``powerexp`` and ignored (None)
    for ``gaussian``.
    """

    kind: str
    k: int
    param: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown family kind {self.kind!r}; expected one of {KINDS}")
        if int(self.k) != self.k or self.k < 2:
            raise DomainError(f"dimension k must be an integer >= 2, got {self.k!r}")
        if self.kind == "gaussian":
            object.__setattr__(self, "param", None)
        elif self.param is None or not (math.isfinite(self.param) and self.param > 0):
            raise DomainError(f"{self.kind} family needs a positive finite parameter, got {self.param!r}")
        else:
            object.__setattr__(self, "param", float(self.param))

    @property
    def label(self):
        if self.kind == "gaussian":
            return "gaussian"
        tag = "t" if self.kind == "student" else "e"
        return f"{tag}:{self.param:g}"

    @cached_property
    def constant(self):
        return standardize_constant(self.kind, self.param, self.k)


def parse_family(spec, k):
    """Parse ``gaussian`` | ``t:<nu>`` | ``e:<eta>``."""
    s = str(spec).strip().lower()
    if s in ("gaussian", "normal", "n"):
        return RadialFamily("gaussian", k)
    head, sep, tail = s.partition(":")
    if not sep or head not in ("t", "e"):
        raise ParseError(f"bad family spec {spec!r}; expected gaussian, t:<nu> or e:<eta>")
    try:
        value = float(tail)
    except ValueError:
        raise ParseError(f"bad family parameter in {spec!r}") from None
    return RadialFamily("student" if head == "t" else "powerexp", k, value)


def radial_quantile(family, u):
    """Quantile of the standardized distance d."""
    u = _check_u(u)
    k, c = family.k, family.constant
    if family.kind == "gaussian":
        return np.sqrt(dist_quantile("chi2", u, k) / c)
    if family.kind == "student":
        return np.sqrt(k * dist_quantile("f", u, k, family.param) / c)
    eta = family.param
    return (dist_quantile("gamma", u, k / (2.0 * eta)) / c) ** (1.0 / (2.0 * eta))


def radial_cdf(family, r):
    r = np.asarray(r, dtype=float)
    k, c = family.k, family.constant
    if family.kind == "gaussian":
        return dist_cdf("chi2", c * r**2, k)
    if family.kind == "student":
        return dist_cdf("f", c * r**2 / k, k, family.param)
    eta = family.param
    return dist_cdf("gamma", c * r ** (2.0 * eta), k / (2.0 * eta))


def log_f1(family, r):
    """log f1(r), up to the additive normalizing constant."""
    r = np.asarray(r, dtype=float)
    c = family.constant
    if family.kind == "gaussian":
        return -0.5 * c * r**2
    if family.kind == "student":
        nu = family.param
        return -0.5 * (family.k + nu) * np.log1p(c * r**2 / nu)
    return -c * r ** (2.0 * family.param)


def optimal_score_phi(family, r):
    """phi_f1(r) = -f1'(r) / f1(r)."""
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("phi is defined for r > 0 only")
    c = family.constant
    if family.kind == "gaussian":
        return c * r
    if family.kind == "student":
        nu = family.param
        return (family.k + nu) * c * r / (nu + c * r**2)
    eta = family.param
    return 2.0 * eta * c * r ** (2.0 * eta - 1.0)


def integrate_unit(f, rtol=1e-11):
    """Integral of ``f`` over (0, 1), refined toward u = 1."""
    with warnings.catch_warnings():
        # quad's own warnings are superseded by the error-estimate check below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, 0.0, 1.0, points=_UNIT_POINTS, limit=500,
                                  epsabs=1e-12, epsrel=rtol)
    if not math.isfinite(val) or err > max(1e-6 * abs(val), 1e-9):
        raise ConvergenceError("quadrature did not converge (integral may diverge)", residual=err)
    return val


def _moment_check(family, order):
    # E d^order finite?  Student tails ~ r^-(nu+1)
    if family.kind == "student" and not family.param > order:
        need = "nu > 4 (finite fourth moments)" if order == 4 else "nu > 2 (finite second moments)"
        raise InfiniteMomentError(f"t:{family.param:g} has infinite E[d^{order}]; requires {need}")


def _closed_form_summary(family):
    k, c = family.k, family.constant
    if family.kind == "gaussian":
        D, E = k / c, k * (k + 2) / c**2
        J, I = k * (k + 2.0), c * k
    elif family.kind == "student":
        nu = family.param
        D = k * nu / (nu - 2.0) / c
        E = nu**2 * (k + 2) * k / ((nu - 2.0) * (nu - 4.0)) / c**2
        J = k * (k + 2.0) * (k + nu) / (k + nu + 2.0)
        I = c * k * (k + nu) / (k + nu + 2.0)
    else:
        eta = family.param
        al = k / (2.0 * eta)
        lg = special.gammaln(al)
        D = math.exp(special.gammaln(al + 1.0 / eta) - lg) * c ** (-1.0 / eta)
        E = math.exp(special.gammaln(al + 2.0 / eta) - lg) * c ** (-2.0 / eta)
        J = k * (k + 2.0 * eta)
        if al + 2.0 - 1.0 / eta <= 0:
            I = math.inf
        else:
            I = 4.0 * eta**2 * c ** (1.0 / eta) * math.exp(special.gammaln(al + 2.0 - 1.0 / eta) - lg)
    return D, E, J, I


def _quadrature_summary(family):
    q = lambda u: float(radial_quantile(family, u))
    phi = lambda u: float(optimal_score_phi(family, q(u)))
    D = integrate_unit(lambda u: q(u) ** 2)
    E = integrate_unit(lambda u: q(u) ** 4)
    J = fisher_info_shape(family, "quadrature")
    I = integrate_unit(lambda u: phi(u) ** 2)
    return D, E, J, I


def density_summary(family, method="closed"):
    """Moments, kurtosis and radial Fisher informations of ``family``.

    ``method='closed'`` uses the closed forms; ``'quadrature'`` integrates over
    u in (0, 1) after the substitution r = radial_quantile(u). Raises
    ``InfiniteMomentError`` when E d^4 does not exist.
    """
    _moment_check(family, 4)
    if method == "closed":
        D, E, J, I = _closed_form_summary(family)
    elif method == "quadrature":
        D, E, J, I = _quadrature_summary(family)
    else:
        raise DomainError(f"unknown method {method!r}")
    k = family.k
    kappa = k / (k + 2.0) * E / D**2 - 1.0
    return DensitySummary(Dk=D, Ek=E, kappa=kappa, Jk=J, Ik=I)


def kurtosis(family):
    """kappa_k(g1); zero for the Gaussian."""
    if family.kind == "gaussian":
        return 0.0
    return density_summary(family).kappa


def fisher_info_shape(family, method="closed"):
    """J_k(f1), finite for every supported family (no moment condition)."""
    if method == "closed":
        return _closed_form_summary(family)[2]
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}")
    q = lambda u: float(radial_quantile(family, u))
    return integrate_unit(lambda u: (float(optimal_score_phi(family, q(u))) * q(u)) ** 2)


def sample_spherical_signs(rng, size, k):
    z = rng.standard_normal(tuple(np.atleast_1d(size)) + (k,))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def sample_distances(rng, size, family):
    """Standardized distances via inverse-cdf of uniform draws."""
    u = rng.random(size)
    u = np.where(u > 0.0, u, np.nextafter(0.0, 1.0))
    return radial_quantile(family, u)


def sample_elliptical(n, theta, sigma2, V, family, rng):
    """n draws of theta + sigma d V^{1/2} U.

    ``rng`` is a numpy Generator or an integer seed.
    """
    if not isinstance(rng, np.random.Generator):
        from .rng import stream
        rng = stream(rng)
    k = family.k
    theta = np.asarray(theta, dtype=float).reshape(k)
    V = np.asarray(V, dtype=float)
    if V.shape != (k, k):
        raise DomainError(f"V must be {k}x{k}")
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    if abs(np.linalg.det(V) - 1.0) > 1e-8:
        raise DomainError("V must have determinant one")
    root = matops.symmetric_sqrt(V)
    U = sample_spherical_signs(rng, n, k)
    d = sample_distances(rng, n, family)
    return theta + math.sqrt(sigma2) * (d[:, None] * U) @ root
