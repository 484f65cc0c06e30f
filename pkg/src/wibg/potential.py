"""Interaction potentials in momentum space.

The pair interaction enters every formula only through its (real, isotropic)
Fourier transform lambda(k). Admissible transforms are bounded by their k=0
value: lambda(0) = lambda0 > 0 and 0 <= lambda(k) <= lambda0. Three
parametrised families are provided; the gaussian family is the default used
by the acceptance fixtures.

Units: hbar^2/2m = 1, eps_k = k^2; lambda0 carries energy*volume and is kept
dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

FAMILIES = ("gaussian", "flat_cutoff", "rational")

_SQRT_PI = np.sqrt(np.pi)


@dataclass(frozen=True)
class PotentialModel:
    """Isotropic momentum-space coupling lambda(k).

    family : one of "gaussian", "flat_cutoff", "rational"
    lambda0 : coupling at k = 0 (> 0 for a usable model)
    shape : family width parameter (sigma for gaussian/rational, k_c for
        flat_cutoff); must be > 0
    """

    family: str
    lambda0: float
    shape: float

    def lambda_k(self, k):
        """Coupling lambda(k) for k >= 0 (scalar or array)."""
        k = np.asarray(k, dtype=float)
        if np.any(k < 0):
            raise ValueError("wavenumber k must be nonnegative")
        if self.family == "gaussian":
            out = self.lambda0 * np.exp(-k * k / (2.0 * self.shape ** 2))
        elif self.family == "flat_cutoff":
            out = np.where(k <= self.shape, self.lambda0, 0.0)
        elif self.family == "rational":
            out = self.lambda0 / (1.0 + (k / self.shape) ** 2)
        else:
            raise ValueError(f"unknown potential family {self.family!r}")
        return out if out.ndim else float(out)

    # --- analytic tail data used by the quadrature cutoff logic ---

    def lambda_sq_tail(self, K):
        """Upper bound for int_K^inf lambda(k)^2 dk."""
        l0, s = self.lambda0, self.shape
        if self.family == "gaussian":
            from scipy.special import erfc
            return l0 ** 2 * s * (_SQRT_PI / 2.0) * erfc(K / s)
        if self.family == "flat_cutoff":
            return l0 ** 2 * max(0.0, s - K)
        u = K / s
        return l0 ** 2 * s * (np.pi / 4.0 - 0.5 * np.arctan(u)
                              - 0.5 * u / (1.0 + u * u))

    def lambda_sq_integral(self):
        """int_0^inf lambda(k)^2 dk (finite for all three families)."""
        l0, s = self.lambda0, self.shape
        if self.family == "gaussian":
            return l0 ** 2 * s * _SQRT_PI / 2.0
        if self.family == "flat_cutoff":
            return l0 ** 2 * s
        return l0 ** 2 * s * np.pi / 4.0

    def k2_lambda_integral(self):
        """int_0^inf k^2 lambda(k) dk, or None when divergent (rational)."""
        l0, s = self.lambda0, self.shape
        if self.family == "gaussian":
            return l0 * s ** 3 * _SQRT_PI / np.sqrt(2.0)
        if self.family == "flat_cutoff":
            return l0 * s ** 3 / 3.0
        return None

    def k_support(self, tol=1e-14):
        """k beyond which lambda(k) <= tol * lambda0."""
        s = self.shape
        if self.family == "gaussian":
            return s * np.sqrt(2.0 * np.log(1.0 / tol))
        if self.family == "flat_cutoff":
            return s
        return s / np.sqrt(tol)

    def breakpoints(self):
        """Integrand kink locations (sharp cutoffs) for the quadrature."""
        return (self.shape,) if self.family == "flat_cutoff" else ()

    # --- flat key-value serialisation ---

    def to_config(self):
        key = "kc" if self.family == "flat_cutoff" else "sigma"
        return {"family": self.family, "lambda0": self.lambda0, key: self.shape}

    @staticmethod
    def from_config(cfg):
        try:
            family = cfg["family"]
        except KeyError:
            raise ValueError("missing config key: family") from None
        if family not in FAMILIES:
            raise ValueError(f"unknown potential family {family!r}; "
                             f"expected one of {FAMILIES}")
        try:
            lambda0 = float(cfg["lambda0"])
        except KeyError:
            raise ValueError("missing config key: lambda0") from None
        key = "kc" if family == "flat_cutoff" else "sigma"
        try:
            shape = float(cfg[key])
        except KeyError:
            raise ValueError(f"missing config key: {key}") from None
        return PotentialModel(family=family, lambda0=lambda0, shape=shape)


def gaussian(lambda0, sigma=1.0):
    """lambda(k) = lambda0 * exp(-k^2 / (2 sigma^2))."""
    return PotentialModel("gaussian", float(lambda0), float(sigma))


def flat_cutoff(lambda0, kc=1.0):
    """lambda(k) = lambda0 for k <= kc, 0 beyond."""
    return PotentialModel("flat_cutoff", float(lambda0), float(kc))


def rational(lambda0, sigma=1.0):
    """lambda(k) = lambda0 / (1 + (k/sigma)^2); slowly decaying tails."""
    return PotentialModel("rational", float(lambda0), float(sigma))


def lambda_k(model: PotentialModel, k):
    """Module-level alias for model.lambda_k."""
    return model.lambda_k(k)


@dataclass
class ValidationReport:
    valid: bool
    messages: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    tail_exponent_k2_lambda: Optional[float] = None
    tail_exponent_k2_lambda_sq: Optional[float] = None
    k2_lambda_tail_integrable: Optional[bool] = None
    k2_lambda_sq_tail_integrable: Optional[bool] = None

    def as_dict(self):
        return {
            "valid": self.valid,
            "messages": list(self.messages),
            "checks": dict(self.checks),
            "tail_exponent_k2_lambda": self.tail_exponent_k2_lambda,
            "tail_exponent_k2_lambda_sq": self.tail_exponent_k2_lambda_sq,
            "k2_lambda_tail_integrable": self.k2_lambda_tail_integrable,
            "k2_lambda_sq_tail_integrable": self.k2_lambda_sq_tail_integrable,
        }


def _tail_increments(f, k0, doublings=6):
    """Numeric tail integrals of f over dyadic windows [2^j k0, 2^(j+1) k0]."""
    from wibg._quadrature import integrate_adaptive
    out = []
    for j in range(doublings):
        a, b = k0 * 2.0 ** j, k0 * 2.0 ** (j + 1)
        val, _ = integrate_adaptive(f, np.linspace(a, b, 5), rel_tol=1e-10,
                                    abs_tol=1e-300)
        out.append(val)
    return np.array(out)


def validate(model: PotentialModel, grid_points=1000, k_max=1e3) -> ValidationReport:
    """Check the admissibility bounds and estimate tail decay.

    Samples lambda(k) on a log grid to verify 0 <= lambda(k) <= lambda0 and
    lambda(0) = lambda0, then estimates the decay of k^2 lambda(k) and
    k^2 lambda(k)^2 from tail integrals over doubling windows. A window ratio
    r maps to a local power law k^-p with p = 1 - log2(r); the tail integral
    converges when p > 1.
    """
    rep = ValidationReport(valid=True)

    if model.family not in FAMILIES:
        rep.valid = False
        rep.messages.append(f"unknown family {model.family!r}")
        return rep

    if not model.lambda0 > 0:
        rep.valid = False
        rep.checks["lambda0_positive"] = False
        rep.messages.append("lambda0 must be positive")
        return rep
    rep.checks["lambda0_positive"] = True

    if not model.shape > 0:
        rep.valid = False
        rep.checks["shape_positive"] = False
        rep.messages.append("shape parameter must be positive")
        return rep
    rep.checks["shape_positive"] = True

    ks = np.concatenate([[0.0], np.geomspace(1e-6, k_max, grid_points - 1)])
    lam = np.asarray(model.lambda_k(ks))
    bad_low = lam < -1e-15
    bad_high = lam > model.lambda0 * (1 + 1e-12)
    if bad_low.any() or bad_high.any():
        k_off = ks[bad_low | bad_high][0]
        rep.valid = False
        rep.checks["bounds"] = False
        rep.messages.append(f"lambda(k) outside [0, lambda0] at k = {k_off:g}")
        return rep
    rep.checks["bounds"] = True

    if abs(model.lambda_k(0.0) - model.lambda0) > 1e-12 * model.lambda0:
        rep.valid = False
        rep.checks["lambda_at_zero"] = False
        rep.messages.append("lambda(0) != lambda0")
        return rep
    rep.checks["lambda_at_zero"] = True

    # tail decay diagnostics (do not affect validity wrt the bounds above,
    # but a divergent k^2 lambda^2 tail is flagged: the quantum-depletion
    # integrals need it finite)
    k0 = 4.0 * model.shape
    inc1 = _tail_increments(lambda k: k * k * model.lambda_k(k), k0)
    inc2 = _tail_increments(lambda k: k * k * np.asarray(model.lambda_k(k)) ** 2, k0)

    def exponent(inc):
        inc = inc[inc > 0]
        if inc.size < 2:
            return np.inf  # identically zero tail (sharp cutoff)
        r = inc[-1] / inc[-2]
        return 1.0 - np.log2(r)

    p1, p2 = exponent(inc1), exponent(inc2)
    rep.tail_exponent_k2_lambda = float(p1)
    rep.tail_exponent_k2_lambda_sq = float(p2)
    rep.k2_lambda_tail_integrable = bool(p1 > 1.05)
    rep.k2_lambda_sq_tail_integrable = bool(p2 > 1.05)
    rep.checks["k2_lambda_sq_integrable"] = rep.k2_lambda_sq_tail_integrable
    if not rep.k2_lambda_tail_integrable:
        rep.messages.append(
            f"k^2 lambda(k) tail decays like k^-{p1:.2f}: not integrable "
            "(bounds (A)-(B) still hold; large-x pressure growth is affected)")
    if not rep.k2_lambda_sq_tail_integrable:
        rep.valid = False
        rep.messages.append(
            f"k^2 lambda(k)^2 tail decays like k^-{p2:.2f}: quantum depletion "
            "integral diverges")
    return rep
