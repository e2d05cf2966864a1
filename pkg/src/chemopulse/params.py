"""Model constants for the two-species system, CGS units throughout."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import InvalidParameterError


def default_gamma(length, total_mass, depletion_time=100.0):
    """Consumption rate giving ``gamma * M / L = 1 / depletion_time``."""
    return length / (depletion_time * total_mass)


DEFAULT_GAMMA = default_gamma(1.8, 1.0)


@dataclass(frozen=True)
class PhysicalParams:
    """All constants of the two-species chemotaxis model.

    Diffusivities are in cm^2/s, drifts (``chi*``) in cm/s, ``alpha`` in 1/s
    and ``gamma*`` per unit density per second. Species 1 is the slow
    (green) population, species 2 the fast (red) one, by convention.
    """

    D1: float = 1.79e-6
    D2: float = 3.29e-6
    DS: float = 8e-6
    DN: float = 8e-6
    alpha: float = 5e-2
    gamma1: float = DEFAULT_GAMMA
    gamma2: float = DEFAULT_GAMMA
    chi1S: float = 6.49e-5
    chi2S: float = 2.88e-4
    chi1N: float = 2.57e-4
    chi2N: float = 4.74e-4

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidParameterError(f.name, f"expected a number, got {value!r}")
            if not math.isfinite(value) or value <= 0:
                raise InvalidParameterError(f.name, f"must be finite and > 0, got {value!r}")

    def D(self, species):
        return (self.D1, self.D2)[_index(species)]

    def chiS(self, species):
        return (self.chi1S, self.chi2S)[_index(species)]

    def chiN(self, species):
        return (self.chi1N, self.chi2N)[_index(species)]

    def gamma(self, species):
        return (self.gamma1, self.gamma2)[_index(species)]

    def swapped(self) -> PhysicalParams:
        """Same model with the two species relabeled."""
        return dataclasses.replace(
            self,
            D1=self.D2, D2=self.D1,
            gamma1=self.gamma2, gamma2=self.gamma1,
            chi1S=self.chi2S, chi2S=self.chi1S,
            chi1N=self.chi2N, chi2N=self.chi1N,
        )

    def replace(self, **changes) -> PhysicalParams:
        return dataclasses.replace(self, **changes)


def _index(species):
    if species not in (1, 2):
        raise InvalidParameterError("species", f"must be 1 or 2, got {species!r}")
    return species - 1


# Measured and fitted values of the experimental strains. gamma is not
# reported; its default follows the depletion rule for L = 1.8 cm, unit mass.
TABLE1 = PhysicalParams()
