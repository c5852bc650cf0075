"""Verification lab: the expected value of a Bernoulli-masked least-squares
objective in closed form, by exact enumeration, and by Monte Carlo.

For a design matrix X (rows centered per column), response y, weights w,
keep-probabilities p and an L1 weight ``penalty``, the quantity of interest
is

    E || y - (R o X) w ||^2 + penalty * ||p||_1,

with R_ij ~ Bernoulli(p_j) independent per entry. Splitting each mask entry
into its mean and fluctuation gives the exact closed form

    || y - X (w o p) ||^2 + sum_j G_j^2 w_j^2 p_j (1 - p_j) + penalty * ||p||_1,

where G_j^2 = sum_i X_ij^2 (the squared column norms; the cross terms cancel
because the fluctuations are independent and zero-mean). The second term is
the price of mask variance; note it vanishes at p in {0,1}.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import DTYPE, RngStream, as_tensor, assert_finite
from .exceptions import CapacityError, DomainError, ShapeError

ENUMERATION_LIMIT = 20

_X_DOMAIN, _Y_DOMAIN, _W_DOMAIN, _P_DOMAIN, _MC_DOMAIN = range(0xE0, 0xE5)


@dataclass
class ObjectiveInstance:
    """A fixed (X, y) problem; columns of X are centered on construction."""

    x: np.ndarray
    y: np.ndarray
    column_scale: np.ndarray = field(init=False)

    def __post_init__(self):
        self.x = as_tensor(self.x)
        self.y = as_tensor(self.y)
        if self.x.ndim != 2:
            raise ShapeError(f"design matrix must be 2-D, got {self.x.shape}")
        if self.y.shape != (self.x.shape[0],):
            raise ShapeError("response length must match design rows")
        assert_finite(self.x, "design matrix")
        assert_finite(self.y, "response")
        self.x = self.x - self.x.mean(axis=0)
        self.column_scale = np.sqrt((self.x**2).sum(axis=0))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @classmethod
    def random(cls, n: int, d: int, seed: int) -> tuple["ObjectiveInstance", np.ndarray, np.ndarray]:
        """A random instance plus random weights and probabilities, for the lab."""
        root = RngStream(seed)
        x = root.child(_X_DOMAIN).generator().standard_normal((n, d))
        y = root.child(_Y_DOMAIN).generator().standard_normal(n)
        w = root.child(_W_DOMAIN).generator().standard_normal(d)
        p = root.child(_P_DOMAIN).generator().random(d)
        return cls(x=x, y=y), w.astype(DTYPE), p.astype(DTYPE)


def _check(inst: ObjectiveInstance, w, p, penalty: float):
    w = as_tensor(w)
    p = as_tensor(p)
    if w.shape != (inst.d,) or p.shape != (inst.d,):
        raise ShapeError("w and p must be vectors of length d")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError("probabilities must lie in [0, 1]")
    if penalty < 0.0:
        raise DomainError("penalty must be non-negative")
    return w, p


def analytic_objective(inst: ObjectiveInstance, w, p, penalty: float = 0.0) -> float:
    """Closed-form expected objective."""
    w, p = _check(inst, w, p, penalty)
    resid = inst.y - inst.x @ (w * p)
    variance_price = float(((inst.column_scale * w) ** 2 * p * (1.0 - p)).sum())
    return float(resid @ resid) + variance_price + penalty * float(np.abs(p).sum())


def analytic_gradient_p(inst: ObjectiveInstance, w, p, penalty: float = 0.0) -> np.ndarray:
    """Gradient of the closed form w.r.t. p (L1 subgradient uses sign(0)=0)."""
    w, p = _check(inst, w, p, penalty)
    resid = inst.y - inst.x @ (w * p)
    data_term = -2.0 * w * (inst.x.T @ resid)
    variance_term = (inst.column_scale * w) ** 2 * (1.0 - 2.0 * p)
    return data_term + variance_term + penalty * np.sign(p)


def brute_force_objective(inst: ObjectiveInstance, w, p, penalty: float = 0.0) -> float:
    """Exact expectation by enumerating all 2^d masks per row.

    Rows are independent, so the per-entry mask distribution factorises into
    identical per-row enumerations over d bits; capped at d <= 20.
    """
    w, p = _check(inst, w, p, penalty)
    if inst.d > ENUMERATION_LIMIT:
        raise CapacityError(
            f"enumeration over 2^{inst.d} masks exceeds the d <= {ENUMERATION_LIMIT} bound"
        )
    xw = inst.x * w
    total = 0.0
    n_masks = 1 << inst.d
    chunk = 1 << 16
    for start in range(0, n_masks, chunk):
        codes = np.arange(start, min(start + chunk, n_masks), dtype=np.uint64)
        masks = ((codes[:, None] >> np.arange(inst.d, dtype=np.uint64)) & 1).astype(DTYPE)
        weights = np.prod(np.where(masks == 1.0, p, 1.0 - p), axis=1)
        resid = inst.y[None, :] - masks @ xw.T
        total += float(weights @ (resid**2).sum(axis=1))
    return total + penalty * float(np.abs(p).sum())


def monte_carlo_objective(
    inst: ObjectiveInstance, w, p, penalty: float = 0.0,
    n_draws: int = 100_000, rng: RngStream | None = None,
) -> tuple[float, float]:
    """Sampled estimate of the expected objective: (mean, standard error).

    Deterministic p (every entry 0 or 1) collapses the draw distribution to a
    point, so the standard error is exactly 0 there.
    """
    w, p = _check(inst, w, p, penalty)
    if n_draws < 2:
        raise DomainError("need at least 2 draws for a standard error")
    if rng is None:
        rng = RngStream(0, _MC_DOMAIN)
    gen = rng.generator()
    values = np.empty(n_draws, dtype=DTYPE)
    xw = inst.x * w
    chunk = max(1, (1 << 22) // max(1, inst.n * inst.d))
    filled = 0
    while filled < n_draws:
        m = min(chunk, n_draws - filled)
        masks = (gen.random((m, inst.n, inst.d)) < p).astype(DTYPE)
        resid = inst.y[None, :] - np.einsum("mnd,nd->mn", masks, xw)
        values[filled : filled + m] = (resid**2).sum(axis=1)
        filled += m
    values += penalty * float(np.abs(p).sum())
    if np.all(values == values[0]):
        # A constant sample (deterministic p yields identical draws) has the
        # constant as its mean and exactly zero spread; summing n_draws copies
        # in floating point would manufacture rounding noise instead.
        return float(values[0]), 0.0
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(n_draws))
    return mean, stderr
