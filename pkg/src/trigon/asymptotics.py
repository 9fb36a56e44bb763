"""Large-scale predictions for the spectral coordinates.

For a charge in the kernel of the pairing the coordinate is exactly
exp(a*R) with a = 2 Re(exp(-i*theta) Z).  Otherwise the leading
correction comes from a saddle-point evaluation of each ray integral
with the semiflat substitution:

    log X = a R + sum_mu c_mu R^(-1/2) exp(-2 |Z_mu| R) + delta(R),

    c_mu = Omega(mu) <gamma,mu> / (4 pi i)
           * (alpha_mu + e^{i theta}) / (alpha_mu - e^{i theta})
           * sqrt(pi / |Z_mu|),

and the remainder delta is expected to vanish faster than the slowest
correction term.  When several charges share the minimal |Z_mu| their
coefficients are summed into the single reported leading coefficient.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import OnRayTheta, ValidationError
from .tba import log_x


def linear_coefficient(gamma, theta, period_map):
    """a = 2 Re(exp(-i*theta) Z_gamma): slope of log X in the scale R."""
    return 2.0 * (cmath.exp(-1j * theta) * period_map.Z(gamma)).real


@dataclass
class AsymptoticPrediction:
    charge: object
    theta: float
    a: float
    corrections: list          # (mu, c_mu complex, rate 2|Z_mu|)
    rho: float                 # min |Z_mu| over contributing mu; None if exact
    leading_coefficient: float # summed c_mu at the common minimal rate

    @property
    def exact(self):
        return not self.corrections

    def correction_sum(self, R):
        """sum_mu c_mu R^(-1/2) exp(-rate * R) over all contributions."""
        if not self.corrections:
            return 0.0
        total = sum(c * math.exp(-rate * R) for _, c, rate in self.corrections)
        return total.real / math.sqrt(R)

    def value(self, R):
        """Predicted log X at scale R."""
        return self.a * R + self.correction_sum(R)


def build_prediction(gamma, theta, spectrum, period_map, pairing,
                     rate_tol=1e-6, ray_margin=1e-6):
    """Assemble the prediction for one charge at one phase.

    Contributions with a common minimal |Z_mu| (within rate_tol) are
    summed into the reported leading coefficient; the imaginary parts
    cancel between mu and -mu, which is asserted.
    """
    a = linear_coefficient(gamma, theta, period_map)
    zeta = cmath.exp(1j * theta)
    corrections = []
    for mu in spectrum.charges():
        ip = pairing(gamma, mu)
        if ip == 0:
            continue
        Z = period_map.Z(mu)
        absZ = abs(Z)
        alpha = -Z / absZ
        if abs(alpha - zeta) < ray_margin:
            raise OnRayTheta(
                f"exp(i*theta) hits the ray of {mu}; the saddle evaluation "
                f"breaks down there")
        c = (spectrum.omega(mu) * ip / (4j * math.pi)
             * (alpha + zeta) / (alpha - zeta) * math.sqrt(math.pi / absZ))
        corrections.append((mu, c, 2.0 * absZ))
    if not corrections:
        return AsymptoticPrediction(charge=gamma, theta=theta, a=a,
                                    corrections=[], rho=None,
                                    leading_coefficient=0.0)
    rho = min(rate for _, _, rate in corrections) / 2.0
    lead = sum(c for _, c, rate in corrections
               if rate <= 2.0 * rho + rate_tol)
    if abs(lead.imag) > 1e-9 * max(1.0, abs(lead)):
        raise ValidationError(
            f"leading coefficient has imaginary part {lead.imag:.3e}; "
            f"the spectrum is not symmetric")
    corrections.sort(key=lambda t: t[2])
    return AsymptoticPrediction(charge=gamma, theta=theta, a=a,
                                corrections=corrections, rho=rho,
                                leading_coefficient=lead.real)


def remainder(solution, prediction, R=None):
    """delta = measured log X minus the full multi-rate prediction.

    The solver solution must be converged at the same R and theta the
    prediction refers to.
    """
    cfg = solution.config
    if R is None:
        R = cfg.R
    if abs(cfg.R - R) > 1e-12:
        raise ValidationError(
            f"solution was computed at R = {cfg.R}, prediction asked at {R}")
    if abs(cfg.theta - prediction.theta) > 1e-12:
        raise ValidationError("solution and prediction phases differ")
    measured = log_x(solution, prediction.charge).real
    return measured - prediction.value(R)


def decay_table(solutions, prediction):
    """(R, logX, predicted, delta, |delta| sqrt(R) exp(2 rho R)) rows.

    The last column is the remainder rescaled by the slowest correction;
    it should decrease along an increasing R grid when the prediction
    captures the true leading correction.
    """
    rows = []
    for sol in sorted(solutions, key=lambda s: s.config.R):
        R = sol.config.R
        lx = log_x(sol, prediction.charge).real
        pred = prediction.value(R)
        delta = lx - pred
        scale = (abs(delta) * math.sqrt(R) * math.exp(2 * prediction.rho * R)
                 if prediction.rho is not None else abs(delta))
        rows.append((R, lx, pred, delta, scale))
    return rows
