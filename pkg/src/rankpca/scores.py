"""Score functions on (0, 1) and their information constants.

Two kinds of scores:

* power scores K_a(u) = k (a+1) u^a (sign a=0, Wilcoxon a=1, Spearman a=2);
* density scores K_f1(u) = phi_f1(q(u)) q(u), q the standardized radial
  quantile; the Gaussian case is the van der Waerden score chi2_k^{-1}(u).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import elliptic
from .elliptic import RadialFamily
from .errors import DomainError, ParseError

_NAMED_POWER = {"sign": 0.0, "wilcoxon": 1.0, "spearman": 2.0}


@dataclass(frozen=True)
class ScoreSpec:
    """Either ``power`` with exponent ``a`` or ``density`` with radial ``family``."""

    kind: str
    k: int
    a: float | None = None
    family: RadialFamily | None = None

    def __post_init__(self):
        if self.kind == "power":
            if self.a is None or not self.a >= 0:
                raise DomainError(f"power score needs a >= 0, got {self.a!r}")
            object.__setattr__(self, "a", float(self.a))
        elif self.kind == "density":
            if self.family is None or self.family.k != self.k:
                raise DomainError("density score needs a radial family of the same dimension")
        else:
            raise DomainError(f"unknown score kind {self.kind!r}")

    @property
    def label(self):
        if self.kind == "power":
            for name, a in _NAMED_POWER.items():
                if self.a == a:
                    return name
            return f"power:{self.a:g}"
        if self.family.kind == "gaussian":
            return "vdw"
        if self.family.kind == "student":
            return f"tscore:{self.family.param:g}"
        return f"escore:{self.family.param:g}"


def power_score(a, k):
    return ScoreSpec("power", k, a=a)


def density_score(family):
    return ScoreSpec("density", family.k, family=family)


def vdw(k):
    return density_score(RadialFamily("gaussian", k))


def parse_score(spec, k):
    """Parse ``vdw | sign | wilcoxon | spearman | power:<a> | tscore:<nu>``."""
    s = str(spec).strip().lower()
    if s in ("vdw", "vanderwaerden"):
        return vdw(k)
    if s in _NAMED_POWER:
        return power_score(_NAMED_POWER[s], k)
    head, sep, tail = s.partition(":")
    if sep and head in ("power", "tscore"):
        try:
            value = float(tail)
        except ValueError:
            raise ParseError(f"bad score parameter in {spec!r}") from None
        if head == "power":
            return power_score(value, k)
        return density_score(RadialFamily("student", k, value))
    raise ParseError(f"bad score spec {spec!r}; expected vdw, sign, wilcoxon, spearman, "
                     "power:<a> or tscore:<nu>")


def eval_score(K, u):
    """K(u) for u in (0, 1); vectorized."""
    u = elliptic._check_u(u)
    k = K.k
    if K.kind == "power":
        return k * (K.a + 1.0) * u**K.a
    fam = K.family
    if fam.kind == "gaussian":
        return elliptic.dist_quantile("chi2", u, k)
    if fam.kind == "student":
        nu = fam.param
        g = elliptic.dist_quantile("f", u, k, nu)
        return k * (k + nu) * g / (nu + k * g)
    q = elliptic.radial_quantile(fam, u)
    return elliptic.optimal_score_phi(fam, q) * q


def _score_fn(K):
    return lambda u: float(eval_score(K, u))


def score_norm(K, method="closed"):
    """J_k(K) = E[K(U)^2], U uniform on (0, 1)."""
    k = K.k
    if method == "quadrature":
        f = _score_fn(K)
        return elliptic.integrate_unit(lambda u: f(u) ** 2)
    if method != "closed":
        raise DomainError(f"unknown method {method!r}")
    if K.kind == "power":
        return k**2 * (K.a + 1.0) ** 2 / (2.0 * K.a + 1.0)
    return elliptic.fisher_info_shape(K.family)


def score_mean(K):
    """Integral of K over (0, 1); equals k for every valid score."""
    if K.kind == "power":
        return float(K.k)
    return elliptic.integrate_unit(_score_fn(K))


@lru_cache(maxsize=512)
def cross_info(K, g1):
    """J_k(K, g1) = integral of K(u) K_g1(u) over (0, 1)."""
    if K.k != g1.k:
        raise DomainError("score and family dimensions differ")
    if K.kind == "power" and K.a == 0.0:
        return float(K.k) ** 2
    Kg = density_score(g1)
    if K == Kg:
        return score_norm(K)
    f, g = _score_fn(K), _score_fn(Kg)
    return elliptic.integrate_unit(lambda u: f(u) * g(u))


def are_ratio(K, g1):
    """Efficiency of the K-score rank test relative to its pseudo-Gaussian rival under g1.

    The same ratio holds for the eigenvector and the eigenvalue problems.
    Requires finite fourth moments under g1.
    """
    kappa = elliptic.kurtosis(g1)
    k = K.k
    return (1.0 + kappa) * cross_info(K, g1) ** 2 / (k * (k + 2.0) * score_norm(K))


def score_values(K, n):
    """K(r / (n+1)) for r = 1..n."""
    return np.asarray(eval_score(K, np.arange(1, n + 1) / (n + 1.0)), dtype=float)
