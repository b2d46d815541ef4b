"""
Count-law calculus for compound sums X = xi_1 + ... + xi_N

The law of N is known. This module evaluates its Laplace transform
L_N(w) = E[exp(-w N)], inverts it (closed forms for the parametric families,
Newton continuation for tabulated laws) and provides the H-calculus
H(z) = exp(-L_N^{-1}(z)) together with the constants that bound H' and H''.

All functions are pure; laws are immutable.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from tools.errors import (BranchViolation, ConfigError, DerivativeVanished,
                          DomainError, NewtonDivergence, Unsupported)

FAMILIES = ("two_point", "geometric", "shifted_poisson", "tabulated")

TAIL_MASS = 1e-12
NORMALIZATION_TOL = 1e-12
BRANCH_CUT_TOL = 1e-12
NEWTON_TOL = 1e-12
NEWTON_FAIL_TOL = 1e-10
NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 30
DERIVATIVE_FLOOR = 1e-13

ComplexLike = Union[complex, float, np.ndarray, Sequence[complex]]


@dataclass(frozen=True)
class CountLaw:
    """
    Known distribution of N on {1, 2, ...}

    Use the constructors two_point, geometric, shifted_poisson and tabulated.
    A two-point law with p == 1 is the degenerate law N == 1.
    """

    family: str
    p: Optional[float] = None
    lam: Optional[float] = None
    weights: Optional[Tuple[float, ...]] = field(default=None)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"Unknown count-law family: {self.family}")
        if self.family == "two_point":
            if self.p is None or not (0.0 < self.p <= 1.0):
                raise DomainError(f"two_point needs p in (0, 1], got {self.p}")
        elif self.family == "geometric":
            if self.p is None or not (0.0 < self.p < 1.0):
                raise DomainError(f"geometric needs p in (0, 1), got {self.p}")
        elif self.family == "shifted_poisson":
            if self.lam is None or not (self.lam > 0.0) or not math.isfinite(self.lam):
                raise DomainError(f"shifted_poisson needs lambda > 0, got {self.lam}")
        else:
            if not self.weights:
                raise DomainError("tabulated law needs at least one weight")
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0.0) or np.any(w > 1.0) or not np.all(np.isfinite(w)):
                raise DomainError("tabulated weights must be probabilities in [0, 1]")
            if abs(w.sum() - 1.0) > NORMALIZATION_TOL:
                raise DomainError(f"tabulated weights must sum to 1, got {w.sum():.15f}")

    @classmethod
    def two_point(cls, p: float) -> "CountLaw":
        return cls("two_point", p=float(p))

    @classmethod
    def geometric(cls, p: float) -> "CountLaw":
        return cls("geometric", p=float(p))

    @classmethod
    def shifted_poisson(cls, lam: float) -> "CountLaw":
        return cls("shifted_poisson", lam=float(lam))

    @classmethod
    def tabulated(cls, weights: Sequence[float]) -> "CountLaw":
        return cls("tabulated", weights=tuple(float(w) for w in weights))

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> "CountLaw":
        """Build a law from {"family": "two_point", "p": 0.3} style mappings."""
        family = config.get("family")
        if family == "two_point" or family == "geometric":
            return cls(family, p=float(config["p"]))
        if family == "shifted_poisson":
            lam = config.get("lambda", config.get("lam"))
            if lam is None:
                raise ConfigError("shifted_poisson config needs 'lambda'")
            return cls.shifted_poisson(lam)
        if family == "tabulated":
            return cls.tabulated(config["weights"])
        raise ConfigError(f"Unknown count-law family in config: {family}")

    @classmethod
    def from_string(cls, text: str) -> "CountLaw":
        """Parse CLI notation such as "two_point:0.3" or "tabulated:0.2,0.8"."""
        family, _, params = text.partition(":")
        family = family.strip().lower()
        if not params:
            raise ConfigError(f"Count law '{text}' needs parameters, e.g. two_point:0.3")
        try:
            values = [float(v) for v in params.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"Cannot parse count law '{text}'") from exc
        if family == "tabulated":
            return cls.tabulated(values)
        if len(values) != 1:
            raise ConfigError(f"Count law '{text}' takes exactly one parameter")
        if family == "shifted_poisson":
            return cls.shifted_poisson(values[0])
        if family in ("two_point", "geometric"):
            return cls(family, p=values[0])
        raise ConfigError(f"Unknown count-law family: {family}")

    def to_config(self) -> Dict[str, Any]:
        if self.family == "shifted_poisson":
            return {"family": self.family, "lambda": self.lam}
        if self.family == "tabulated":
            return {"family": self.family, "weights": list(self.weights)}
        return {"family": self.family, "p": self.p}

    @property
    def c_lambda(self) -> float:
        """Normalising constant 1 / (e^lambda - 1) of the shifted Poisson law."""
        if self.family != "shifted_poisson":
            raise Unsupported(f"c_lambda is only defined for shifted_poisson, not {self.family}")
        return 1.0 / math.expm1(self.lam)

    @property
    def label(self) -> str:
        if self.family == "shifted_poisson":
            return f"shifted_poisson(lambda={self.lam:g})"
        if self.family == "tabulated":
            return "tabulated(" + ",".join(f"{w:g}" for w in self.weights) + ")"
        return f"{self.family}(p={self.p:g})"


def _kind(law: CountLaw) -> Tuple[str, Optional[float]]:
    """Canonical calculus kind: "one", "two_point", "geometric", "shifted_poisson" or "tabulated"."""
    if law.family == "two_point":
        return ("one", None) if law.p == 1.0 else ("two_point", law.p)
    if law.family == "tabulated":
        w = np.trim_zeros(np.asarray(law.weights, dtype=float), "b")
        if len(w) == 1:
            return "one", None
        if len(w) == 2 and w[0] > 0.0:
            return "two_point", float(w[0])
        return "tabulated", None
    return law.family, law.p


def has_closed_form_inverse(law: CountLaw) -> bool:
    """False only for tabulated laws with three or more support points."""
    return _kind(law)[0] != "tabulated"


def _tabulated_arrays(law: CountLaw) -> Tuple[np.ndarray, np.ndarray]:
    w = np.trim_zeros(np.asarray(law.weights, dtype=float), "b")
    return np.arange(1, len(w) + 1, dtype=float), w


def _as_complex(z: ComplexLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=complex)
    return np.atleast_1d(arr), arr.ndim == 0


def _restore(values: np.ndarray, scalar: bool):
    return complex(values[0]) if scalar else values


def _on_cut(arg: np.ndarray) -> np.ndarray:
    """True where arg lies on the principal-branch cut R_{<=0} of log and sqrt."""
    return (arg.real <= 0.0) & (np.abs(arg.imag) <= BRANCH_CUT_TOL * np.maximum(1.0, np.abs(arg)))


def _check_geometric_domain(law: CountLaw, w: np.ndarray) -> None:
    bound = math.log1p(-law.p)
    bad = np.flatnonzero(~(w.real > bound))
    if bad.size:
        raise DomainError(
            f"geometric Laplace transform needs Re(w) > log(1-p) = {bound:.6g}",
            index=int(bad[0]),
        )


def laplace(law: CountLaw, z: ComplexLike):
    """
    Laplace transform L_N(z) = sum_k p_k exp(-z k)

    Args:
        law: Count law
        z: Complex argument (scalar or array)

    Returns:
        L_N(z), same shape as z

    Raises:
        DomainError: For the geometric law when Re(z) <= log(1 - p)
    """
    w, scalar = _as_complex(z)
    kind, p = _kind(law)
    if kind == "one":
        out = np.exp(-w)
    elif kind == "two_point":
        out = p * np.exp(-w) + (1.0 - p) * np.exp(-2.0 * w)
    elif kind == "geometric":
        _check_geometric_domain(law, w)
        y = np.exp(-w)
        out = p * y / (1.0 - (1.0 - p) * y)
    elif kind == "shifted_poisson":
        out = law.c_lambda * np.expm1(law.lam * np.exp(-w))
    else:
        ks, weights = _tabulated_arrays(law)
        out = np.exp(-np.multiply.outer(w, ks)) @ weights
    return _restore(out, scalar)


def pgf(law: CountLaw, s: ComplexLike):
    """
    Probability generating function G_N(s) = sum_k p_k s^k

    L_N(w) = G_N(exp(-w)), so a compound CF is G_N(phi_xi(u)) with no
    logarithm of phi_xi involved.

    Raises:
        DomainError: For the geometric law when |(1 - p) s| >= 1
    """
    s_arr, scalar = _as_complex(s)
    kind, p = _kind(law)
    if kind == "one":
        out = s_arr.copy()
    elif kind == "two_point":
        out = p * s_arr + (1.0 - p) * s_arr * s_arr
    elif kind == "geometric":
        bad = np.flatnonzero(np.abs((1.0 - p) * s_arr) >= 1.0)
        if bad.size:
            raise DomainError("geometric generating function needs |(1-p) s| < 1", index=int(bad[0]))
        out = p * s_arr / (1.0 - (1.0 - p) * s_arr)
    elif kind == "shifted_poisson":
        out = law.c_lambda * np.expm1(law.lam * s_arr)
    else:
        _, weights = _tabulated_arrays(law)
        # Horner on the coefficients of s, s^2, ..., s^K
        out = np.zeros_like(s_arr)
        for weight in weights[::-1]:
            out = (out + weight) * s_arr
    return _restore(out, scalar)


def laplace_derivative(law: CountLaw, z: ComplexLike):
    """First derivative L_N'(z) = -sum_k k p_k exp(-z k)."""
    w, scalar = _as_complex(z)
    kind, p = _kind(law)
    if kind == "one":
        out = -np.exp(-w)
    elif kind == "two_point":
        out = -p * np.exp(-w) - 2.0 * (1.0 - p) * np.exp(-2.0 * w)
    elif kind == "geometric":
        _check_geometric_domain(law, w)
        y = np.exp(-w)
        out = -p * y / (1.0 - (1.0 - p) * y) ** 2
    elif kind == "shifted_poisson":
        y = np.exp(-w)
        out = -law.c_lambda * law.lam * y * np.exp(law.lam * y)
    else:
        ks, weights = _tabulated_arrays(law)
        out = -(np.exp(-np.multiply.outer(w, ks)) @ (ks * weights))
    return _restore(out, scalar)


def laplace_second_derivative(law: CountLaw, z: ComplexLike):
    """Second derivative L_N''(z) = sum_k k^2 p_k exp(-z k)."""
    w, scalar = _as_complex(z)
    kind, p = _kind(law)
    if kind == "one":
        out = np.exp(-w)
    elif kind == "two_point":
        out = p * np.exp(-w) + 4.0 * (1.0 - p) * np.exp(-2.0 * w)
    elif kind == "geometric":
        _check_geometric_domain(law, w)
        y = np.exp(-w)
        q = 1.0 - p
        out = p * y * (1.0 + q * y) / (1.0 - q * y) ** 3
    elif kind == "shifted_poisson":
        y = np.exp(-w)
        out = law.c_lambda * law.lam * y * np.exp(law.lam * y) * (1.0 + law.lam * y)
    else:
        ks, weights = _tabulated_arrays(law)
        out = np.exp(-np.multiply.outer(w, ks)) @ (ks * ks * weights)
    return _restore(out, scalar)


def h_closed_form(law: CountLaw, z: ComplexLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Closed-form H, H', H'' and the branch-cut mask, without raising.

    Returns:
        (H, H', H'', violations) as 1-d arrays; entries flagged in violations are nan

    Raises:
        Unsupported: For tabulated laws with three or more support points
    """
    z, _ = _as_complex(z)
    kind, p = _kind(law)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "one":
            mask = np.zeros(z.shape, dtype=bool)
            H, H1, H2 = z.copy(), np.ones_like(z), np.zeros_like(z)
        elif kind == "two_point":
            q = 1.0 - p
            D = p * p + 4.0 * z * q
            mask = _on_cut(D)
            s = np.sqrt(D)
            # equals (s - p) / (2q) without cancellation for small |z|
            H = 2.0 * z / (p + s)
            H1 = 1.0 / s
            H2 = -2.0 * q / (D * s)
        elif kind == "geometric":
            q = 1.0 - p
            den = p + z * q
            mask = np.abs(den) <= BRANCH_CUT_TOL
            H = z / den
            H1 = p / den ** 2
            H2 = -2.0 * p * q / den ** 3
        elif kind == "shifted_poisson":
            c = law.c_lambda
            a = z / c + 1.0
            mask = _on_cut(a)
            H = np.log(a) / law.lam
            H1 = 1.0 / (law.lam * (c + z))
            H2 = -1.0 / (law.lam * (c + z) ** 2)
        else:
            raise Unsupported(
                f"no closed-form inverse for {law.label}; use laplace_inverse_continued"
            )
    for arr in (H, H1, H2):
        arr[mask] = np.nan
    return H, H1, H2, mask


def _raise_on_violation(law: CountLaw, mask: np.ndarray, z: np.ndarray) -> None:
    bad = np.flatnonzero(mask)
    if bad.size:
        j = int(bad[0])
        raise BranchViolation(
            f"{law.label}: argument on a principal-branch cut at z={complex(z[j]):.6g}",
            index=j,
            z=complex(z[j]),
        )


def h(law: CountLaw, z: ComplexLike):
    """H(z) = exp(-L_N^{-1}(z)); H(phi_X(u)) = phi_xi(u)."""
    arr, scalar = _as_complex(z)
    H, _, _, mask = h_closed_form(law, arr)
    _raise_on_violation(law, mask, arr)
    return _restore(H, scalar)


def h_prime(law: CountLaw, z: ComplexLike):
    arr, scalar = _as_complex(z)
    _, H1, _, mask = h_closed_form(law, arr)
    _raise_on_violation(law, mask, arr)
    return _restore(H1, scalar)


def h_second(law: CountLaw, z: ComplexLike):
    arr, scalar = _as_complex(z)
    _, _, H2, mask = h_closed_form(law, arr)
    _raise_on_violation(law, mask, arr)
    return _restore(H2, scalar)


def h_generic(law: CountLaw, w: ComplexLike) -> Tuple[Any, Any, Any]:
    """
    H, H', H'' from an inverse value w = L_N^{-1}(z), valid for every family.

    H'(z) = -exp(-w) / L_N'(w) and
    H''(z) = -(H'(z))^3 * sum_{k>=2} p_k (k^2 - k) exp(-(k-2) w),
    where the sum equals exp(2w) (L_N''(w) + L_N'(w)).
    """
    arr, scalar = _as_complex(w)
    d1 = np.atleast_1d(laplace_derivative(law, arr))
    d2 = np.atleast_1d(laplace_second_derivative(law, arr))
    H = np.exp(-arr)
    H1 = -H / d1
    H2 = -(H1 ** 3) * np.exp(2.0 * arr) * (d2 + d1)
    return _restore(H, scalar), _restore(H1, scalar), _restore(H2, scalar)


def laplace_inverse(law: CountLaw, z: ComplexLike):
    """
    Closed-form inverse L_N^{-1}(z) on principal branches

    Args:
        law: Count law (two-point, geometric, shifted Poisson, or tabulated with K <= 2)
        z: Complex argument (scalar or array)

    Returns:
        w with L_N(w) = z

    Raises:
        BranchViolation: If a log/sqrt argument lies on its branch cut
        Unsupported: For tabulated laws with three or more support points
    """
    arr, scalar = _as_complex(z)
    H, _, _, mask = h_closed_form(law, arr)
    with np.errstate(invalid="ignore"):
        mask = mask | _on_cut(np.where(mask, 1.0, H))
    _raise_on_violation(law, mask, arr)
    return _restore(-np.log(H), scalar)


def _newton_solve(law: CountLaw, z: complex, w0: complex, index: int) -> complex:
    """Solve L_N(w) = z by damped Newton from w0."""

    def residual_at(w: complex) -> float:
        try:
            return abs(laplace(law, w) - z)
        except DomainError:
            return math.inf

    w = complex(w0)
    residual = residual_at(w)
    for _ in range(NEWTON_MAX_ITER):
        if residual <= NEWTON_TOL:
            break
        d = laplace_derivative(law, w)
        if abs(d) < DERIVATIVE_FLOOR:
            raise DerivativeVanished(
                f"|L_N'(w)| < {DERIVATIVE_FLOOR:g} at path index {index}", index=index, w=w
            )
        step = (laplace(law, w) - z) / d
        t = 1.0
        candidate, cand_residual = w - step, residual_at(w - step)
        halvings = 0
        while cand_residual >= residual and halvings < NEWTON_MAX_HALVINGS:
            t *= 0.5
            halvings += 1
            candidate = w - t * step
            cand_residual = residual_at(candidate)
        if cand_residual >= residual:
            break
        w, residual = candidate, cand_residual
    if residual > NEWTON_FAIL_TOL:
        raise NewtonDivergence(
            f"Newton continuation stalled at path index {index} (residual {residual:.3g})",
            index=index,
            residual=residual,
        )
    return w


def laplace_inverse_continued(law: CountLaw, z_path: ComplexLike) -> np.ndarray:
    """
    Branch-continuous inverse of L_N along a sampled path starting at z = 1

    Each node is solved by Newton's method started from the previous node's
    solution, so the returned values follow one branch of the inverse.

    Args:
        law: Any count law
        z_path: Path nodes, z_path[0] must equal 1 (where the inverse is 0)

    Returns:
        Array of inverse values along the path

    Raises:
        DomainError: If the path does not start at 1
        NewtonDivergence: If a node cannot be solved to 1e-10 (carries .index)
        DerivativeVanished: If L_N' vanishes at an iterate (carries .index)
    """
    path = np.atleast_1d(np.asarray(z_path, dtype=complex)).ravel()
    out = np.zeros(path.shape, dtype=complex)
    if path.size == 0:
        return out
    if abs(path[0] - 1.0) > 1e-12:
        raise DomainError(f"continuation path must start at z=1, got {complex(path[0])}")
    w = 0j
    for j in range(1, path.size):
        w = _newton_solve(law, complex(path[j]), w, j)
        out[j] = w
    return out


def pmf_table(law: CountLaw, tail: float = TAIL_MASS) -> Tuple[np.ndarray, np.ndarray]:
    """
    Probabilities p_k on k = 1..K, truncated once the remaining mass is below tail

    Returns:
        (ks, probs) arrays
    """
    if law.family == "tabulated":
        return _tabulated_arrays(law)
    if law.family == "two_point":
        if law.p == 1.0:
            return np.array([1.0]), np.array([1.0])
        return np.array([1.0, 2.0]), np.array([law.p, 1.0 - law.p])

    probs = []
    k = 0
    remaining = 1.0
    if law.family == "geometric":
        q = 1.0 - law.p
        term = law.p
        while True:
            k += 1
            probs.append(term)
            remaining = q ** k
            if remaining < tail and k ** 3 * term < tail:
                break
            term *= q
    else:
        lam = law.lam
        term = law.c_lambda * lam
        cumulative = 0.0
        while True:
            k += 1
            probs.append(term)
            cumulative += term
            remaining = 1.0 - cumulative
            if remaining < tail and k ** 3 * term < tail:
                break
            term *= lam / (k + 1)
    return np.arange(1, k + 1, dtype=float), np.asarray(probs)


def moments(law: CountLaw) -> Tuple[float, float]:
    """Exact (E[N], E[N^2])."""
    kind, p = _kind(law)
    if kind == "one":
        return 1.0, 1.0
    if kind == "two_point":
        return 2.0 - p, 4.0 - 3.0 * p
    if kind == "geometric":
        return 1.0 / p, (2.0 - p) / p ** 2
    if kind == "shifted_poisson":
        lam = law.lam
        base = law.c_lambda * math.exp(lam)
        return base * lam, base * (lam * lam + lam)
    ks, weights = _tabulated_arrays(law)
    return float(ks @ weights), float((ks * ks) @ weights)


def size_biased(law: CountLaw, tail: float = TAIL_MASS) -> CountLaw:
    """Size-biased law tau with P(tau = k) = k p_k / E[N], as a tabulated law."""
    ks, probs = pmf_table(law, tail)
    weights = ks * probs
    weights = weights / weights.sum()
    return CountLaw.tabulated(weights)


def rho_star(law: CountLaw) -> float:
    """
    Analyticity radius of H on the negative real axis

    Raises:
        Unsupported: For tabulated laws
    """
    if law.family == "tabulated":
        raise Unsupported("rho_star has no closed form for tabulated laws")
    if law.family == "two_point":
        if law.p == 1.0:
            return math.inf
        return law.p ** 2 / (4.0 * (1.0 - law.p))
    if law.family == "geometric":
        return law.p / (1.0 - law.p)
    return law.c_lambda


def kappa_from_rho0(law: CountLaw, rho0: float) -> float:
    """
    kappa(rho0) = max{H'(-rho0), -H''(-rho0)}

    Raises:
        DomainError: If rho0 <= 0 or rho0 >= rho_star(law)
    """
    if not rho0 > 0.0:
        raise DomainError(f"rho0 must be positive, got {rho0}")
    limit = rho_star(law)
    if rho0 >= limit:
        raise DomainError(f"rho0={rho0:g} must be below rho*={limit:.6g} for {law.label}")
    _, H1, H2, _ = h_closed_form(law, -float(rho0))
    return float(max(H1[0].real, -H2[0].real))


def kappa_symmetric(law: CountLaw) -> float:
    """kappa = max{1/p_1, (E[N^2] - E[N]) / p_1^3}; bounds |H'| and |H''| for symmetric xi."""
    ks, probs = pmf_table(law)
    p1 = float(probs[0]) if ks[0] == 1.0 else 0.0
    if p1 <= 0.0:
        raise DomainError(f"kappa_symmetric needs P(N=1) > 0 for {law.label}")
    mean, second = moments(law)
    if not math.isfinite(second):
        raise DomainError("kappa_symmetric needs a finite second moment")
    return max(1.0 / p1, (second - mean) / p1 ** 3)


@dataclass(frozen=True)
class NonvanishingVerdict:
    """Outcome of check_nonvanishing."""

    verdict: str  # "guaranteed_no_zeros" | "guaranteed_near_and_far" | "inconclusive"
    reason: str
    u_circ: Optional[float] = None
    details: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"verdict": self.verdict, "reason": self.reason, "u_circ": self.u_circ, "details": dict(self.details)}


def size_biased_infinitely_divisible(law: CountLaw) -> bool:
    """
    True when the size-biased law is known to be infinitely divisible.

    Geometric N gives 1 + negative binomial, shifted Poisson N gives 1 + Poisson,
    and N == 1 gives a point mass.
    """
    kind, _ = _kind(law)
    return kind in ("one", "geometric", "shifted_poisson")


def check_nonvanishing(
    law: CountLaw,
    xi_stats: Mapping[str, Optional[float]],
    use_infinite_divisibility: bool = False,
) -> NonvanishingVerdict:
    """
    Sufficient conditions for phi_Lambda (Lambda = xi_1 + ... + xi_tau) to have no real zeros

    Args:
        law: Count law of N
        xi_stats: {"variance": Var(xi), "gaussian_component": c >= 0, "mean": E[xi] (default 0)}
        use_infinite_divisibility: Also accept an infinitely divisible size-biased law

    Returns:
        NonvanishingVerdict

    Raises:
        DomainError: For a nonpositive variance or negative Gaussian component
    """
    variance = xi_stats.get("variance")
    gaussian = float(xi_stats.get("gaussian_component") or 0.0)
    mean_xi = float(xi_stats.get("mean") or 0.0)
    if variance is not None and not float(variance) > 0.0:
        raise DomainError(f"variance of xi must be positive, got {variance}")
    if gaussian < 0.0:
        raise DomainError(f"gaussian_component must be nonnegative, got {gaussian}")

    tau = size_biased(law)
    ks, r = _tabulated_arrays(tau)
    m = int(np.flatnonzero(r > 0.0)[0])
    r_m = float(r[m])
    mean_tau = float(ks @ r)
    var_tau = max(float((ks * ks) @ r) - mean_tau ** 2, 0.0)
    details = {"m": float(m + 1), "r_m": r_m, "mean_tau": mean_tau, "var_tau": var_tau}

    if use_infinite_divisibility and size_biased_infinitely_divisible(law):
        return NonvanishingVerdict("guaranteed_no_zeros", "size-biased law is infinitely divisible", details=details)
    if r_m > 0.5:
        return NonvanishingVerdict("guaranteed_no_zeros", "r_m>1/2", details=details)
    if variance is None:
        return NonvanishingVerdict("inconclusive", "variance of xi unavailable", details=details)

    variance = float(variance)
    if gaussian > 0.0:
        alpha = math.exp((math.pi ** 2 / 8.0) * gaussian ** 2 / (variance * mean_tau))
        details["alpha"] = alpha
        if r_m > 1.0 / (1.0 + alpha):
            return NonvanishingVerdict("guaranteed_no_zeros", "r_m>1/(1+alpha)", details=details)

    sigma = math.sqrt(mean_tau * variance + var_tau * mean_xi ** 2)
    details["sigma"] = sigma
    return NonvanishingVerdict(
        "guaranteed_near_and_far",
        "no zeros for |u| < u_circ; no zeros beyond some finite u",
        u_circ=math.pi / (2.0 * sigma),
        details=details,
    )


def sample_counts(law: CountLaw, rng_seed: Union[int, np.random.SeedSequence, np.random.Generator], n: int) -> np.ndarray:
    """
    n i.i.d. draws of N, deterministic given the seed

    Args:
        law: Count law
        rng_seed: Integer seed, SeedSequence or Generator
        n: Number of draws (>= 1)
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    kind, p = _kind(law)
    if kind == "one":
        return np.ones(n, dtype=np.int64)
    if kind == "two_point":
        return 1 + (rng.random(n) >= p).astype(np.int64)
    if kind == "geometric":
        return rng.geometric(p, size=n).astype(np.int64)
    if kind == "shifted_poisson":
        draws = rng.poisson(law.lam, size=n)
        zeros = np.flatnonzero(draws == 0)
        while zeros.size:
            draws[zeros] = rng.poisson(law.lam, size=zeros.size)
            zeros = zeros[draws[zeros] == 0]
        return draws.astype(np.int64)
    ks, weights = _tabulated_arrays(law)
    return rng.choice(ks.astype(np.int64), size=n, p=weights / weights.sum())
