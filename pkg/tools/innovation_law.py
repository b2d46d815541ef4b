"""
Innovation (summand) laws used for simulation and as ground truth
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from estimator.base_estimator.base_estimator import CutoffRule
from tools.errors import ConfigError, DomainError

THEORY_POLY_C = 1.0 / 3.0


@dataclass(frozen=True)
class SmoothClass:
    """|phi_xi(u)| <= M (1+|u|)^{-1-beta}"""

    beta: float
    M: float


@dataclass(frozen=True)
class SupersmoothClass:
    """|phi_xi(u)| <= M exp(-c_gamma |u|^gamma)"""

    gamma: float
    c_gamma: float
    M: float


ClassInfo = Union[SmoothClass, SupersmoothClass]


@dataclass(frozen=True)
class InnovationLaw:
    """
    Law of xi: Laplace(loc, scale), Normal(loc, scale) or a custom triple
    of sampler, density and characteristic function.
    """

    kind: str
    loc: float = 0.0
    scale: float = 1.0
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = field(default=None, compare=False, repr=False)
    density: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False, repr=False)
    cf_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False, repr=False)
    class_info: Optional[ClassInfo] = None
    name: str = ""

    def __post_init__(self):
        if self.kind in ("laplace", "normal"):
            if not self.scale > 0.0:
                raise DomainError(f"{self.kind} scale must be positive, got {self.scale}")
            if self.class_info is None:
                object.__setattr__(self, "class_info", self._builtin_class())
        elif self.kind == "custom":
            if self.sampler is None or self.density is None or self.cf_fn is None:
                raise ConfigError("custom innovation law needs sampler, density and cf")
        else:
            raise ConfigError(f"Unknown innovation law: {self.kind}")
        if not self.name:
            object.__setattr__(self, "name", self._default_name())

    @classmethod
    def laplace(cls, loc: float = 0.0, scale: float = 1.0) -> "InnovationLaw":
        return cls("laplace", loc=float(loc), scale=float(scale))

    @classmethod
    def normal(cls, loc: float = 0.0, scale: float = 1.0) -> "InnovationLaw":
        return cls("normal", loc=float(loc), scale=float(scale))

    @classmethod
    def custom(cls, sampler, density, cf, class_info: Optional[ClassInfo] = None, name: str = "custom") -> "InnovationLaw":
        return cls("custom", sampler=sampler, density=density, cf_fn=cf, class_info=class_info, name=name)

    @classmethod
    def point_mass(cls, at: float) -> "InnovationLaw":
        """Degenerate xi == at (no density; for count-sampling checks)."""
        return cls.custom(
            sampler=lambda rng, n: np.full(n, float(at)),
            density=lambda x: np.zeros(np.shape(x)),
            cf=lambda u: np.exp(1j * np.asarray(u, dtype=float) * at),
            name=f"point_mass({at:g})",
        )

    @classmethod
    def from_density_grid(cls, x_grid: np.ndarray, density_values: np.ndarray, name: str = "grid_density") -> "InnovationLaw":
        """
        Law with the clipped, renormalized density given on an x-grid

        Sampling inverts the piecewise-linear CDF built from the trapezoid
        integral of max(density, 0).
        """
        x = np.asarray(x_grid, dtype=float)
        dens = np.clip(np.asarray(density_values, dtype=float), 0.0, None)
        increments = 0.5 * (dens[1:] + dens[:-1]) * np.diff(x)
        cdf = np.concatenate([[0.0], np.cumsum(increments)])
        total = cdf[-1]
        if not total > 0.0:
            raise DomainError("density has no positive mass on the grid")
        cdf = cdf / total
        dens = dens / total

        def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
            return np.interp(rng.random(n), cdf, x)

        def density(points: np.ndarray) -> np.ndarray:
            return np.interp(points, x, dens, left=0.0, right=0.0)

        def cf(u: np.ndarray) -> np.ndarray:
            u = np.atleast_1d(np.asarray(u, dtype=float))
            return trapezoid(dens[None, :] * np.exp(1j * np.outer(u, x)), x, axis=1)

        return cls.custom(sampler, density, cf, name=name)

    @classmethod
    def from_string(cls, text: str) -> "InnovationLaw":
        """Parse "laplace", "normal", "laplace:0,1" or "normal:0,2"."""
        kind, _, params = text.strip().lower().partition(":")
        if kind not in ("laplace", "normal"):
            raise ConfigError(f"Unknown innovation law '{text}'; use laplace or normal")
        try:
            values = [float(v) for v in params.split(",") if v.strip()] if params else []
        except ValueError as exc:
            raise ConfigError(f"Cannot parse innovation law '{text}'") from exc
        if len(values) > 2:
            raise ConfigError(f"Innovation law '{text}' takes at most loc,scale")
        loc = values[0] if values else 0.0
        scale = values[1] if len(values) > 1 else 1.0
        return cls(kind, loc=loc, scale=scale)

    def _builtin_class(self) -> ClassInfo:
        if self.kind == "laplace":
            return SmoothClass(beta=1.0, M=1.0 / self.scale ** 2)
        return SupersmoothClass(gamma=2.0, c_gamma=self.scale ** 2 / 2.0, M=1.0)

    def _default_name(self) -> str:
        if self.kind == "custom":
            return "custom"
        return f"{self.kind}(loc={self.loc:g},scale={self.scale:g})"

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "laplace":
            return rng.laplace(self.loc, self.scale, size=n)
        if self.kind == "normal":
            return rng.normal(self.loc, self.scale, size=n)
        return np.asarray(self.sampler(rng, n), dtype=float)

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "laplace":
            return stats.laplace.pdf(x, loc=self.loc, scale=self.scale)
        if self.kind == "normal":
            return stats.norm.pdf(x, loc=self.loc, scale=self.scale)
        return np.asarray(self.density(x), dtype=float)

    def cf(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "laplace":
            return np.exp(1j * u * self.loc) / (1.0 + (self.scale * u) ** 2)
        if self.kind == "normal":
            return np.exp(1j * u * self.loc - 0.5 * (self.scale * u) ** 2)
        return np.asarray(self.cf_fn(u), dtype=complex)

    @property
    def mean(self) -> Optional[float]:
        return self.loc if self.kind != "custom" else None

    @property
    def variance(self) -> Optional[float]:
        if self.kind == "laplace":
            return 2.0 * self.scale ** 2
        if self.kind == "normal":
            return self.scale ** 2
        return None

    def theory_cutoff_rule(self, c: float = THEORY_POLY_C) -> CutoffRule:
        """Cutoff schedule matching the smoothness class of xi."""
        if isinstance(self.class_info, SmoothClass):
            return CutoffRule.polynomial(self.class_info.beta, c)
        if isinstance(self.class_info, SupersmoothClass):
            return CutoffRule.supersmooth(self.class_info.gamma, self.class_info.c_gamma)
        raise ConfigError(f"innovation law {self.name} has no smoothness class; give a fixed cutoff")

    def to_config(self):
        info = None
        if self.class_info is not None:
            info = {"class": type(self.class_info).__name__, **self.class_info.__dict__}
        return {"kind": self.kind, "loc": self.loc, "scale": self.scale, "name": self.name, "class_info": info}
