"""Warp-function ODE of a warped-product gradient Yamabe soliton.

With ``rho = F'`` the warp function of ``dr^2 + rho(r)^2 gbar`` satisfies

    2(n-1) rho rho'' + (n-1)(n-2) rho'^2 + rho^2 (rho' + lambda) = Rbar

and, after one differentiation,

    2(n-1)^2 rho' rho'' + 2(n-1) rho rho''' + 2 rho rho' (rho' + lambda)
        + rho^2 rho'' = 0.

Everything here is a pure function of plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Raised when a formula is evaluated outside its domain (e.g. rho <= 0)."""


@dataclass(frozen=True)
class SolitonParams:
    """Dimension ``n``, soliton constant ``lam`` and fiber scalar curvature ``rbar``.

    Expanding solitons (``lam < 0``) are required unless ``permissive`` is set,
    which admits any sign of ``lam`` for exploratory integration only.
    """

    n: int
    lam: float
    rbar: float
    permissive: bool = False

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"dimension must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "rbar", float(self.rbar))
        if self.n < 3:
            raise ValueError(f"dimension n must be >= 3, got {self.n}")
        if not (math.isfinite(self.lam) and math.isfinite(self.rbar)):
            raise ValueError("lambda and rbar must be finite")
        if not self.permissive and not self.lam < 0:
            raise ValueError(
                f"expanding solitons need lambda < 0 (got {self.lam}); "
                "pass permissive=True to explore other signs"
            )

    @property
    def expanding(self) -> bool:
        return self.lam < 0

    @property
    def fixed_warp(self) -> float | None:
        """Constant warp ``sqrt(rbar/lam)`` of the trivial line solution, if real."""
        if self.lam == 0:
            return None
        q = self.rbar / self.lam
        return math.sqrt(q) if q >= 0 else None

    def as_dict(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "rbar": self.rbar}


@dataclass(frozen=True)
class SolitonState:
    """Point ``(r, rho, rho')`` on a trajectory."""

    r: float
    rho: float
    drho: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError(f"warp must be nonnegative, got rho={self.rho}")

    @property
    def is_tip(self) -> bool:
        return self.rho == 0.0


@dataclass(frozen=True)
class OdeResidual:
    eq1_res: float
    eq2_res: float
    scale: float

    @property
    def relative(self) -> float:
        return max(abs(self.eq1_res), abs(self.eq2_res)) / self.scale


_TINY = 1e-300


def _check_rho(rho: float) -> None:
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")


def rho_second(params: SolitonParams, rho: float, drho: float) -> float:
    """rho'' solved from the warp equation."""
    _check_rho(rho)
    n = params.n
    num = params.rbar - (n - 1) * (n - 2) * drho * drho - rho * rho * (drho + params.lam)
    return num / (2 * (n - 1) * rho)


def rho_third(params: SolitonParams, rho: float, drho: float, ddrho: float) -> float:
    """rho''' solved from the differentiated warp equation."""
    _check_rho(rho)
    n = params.n
    num = (
        2 * (n - 1) ** 2 * drho * ddrho
        + 2 * rho * drho * (drho + params.lam)
        + rho * rho * ddrho
    )
    return -num / (2 * (n - 1) * rho)


def eq1_terms(params: SolitonParams, rho: float, drho: float, ddrho: float):
    n = params.n
    return (
        2 * (n - 1) * rho * ddrho,
        (n - 1) * (n - 2) * drho * drho,
        rho * rho * (drho + params.lam),
        -params.rbar,
    )


def eq2_terms(params: SolitonParams, rho: float, drho: float, ddrho: float, dddrho: float):
    n = params.n
    return (
        2 * (n - 1) ** 2 * drho * ddrho,
        2 * (n - 1) * rho * dddrho,
        2 * rho * drho * (drho + params.lam),
        rho * rho * ddrho,
    )


def eq1_residual(params: SolitonParams, rho: float, drho: float, ddrho: float) -> OdeResidual:
    """LHS - Rbar of the warp equation, with the largest summand as scale.

    Only the ODE part is filled in; ``eq2_res`` is 0.
    """
    _check_rho(rho)
    terms = eq1_terms(params, rho, drho, ddrho)
    res = terms[0] + terms[1] + terms[2] + terms[3]
    scale = max(max(abs(t) for t in terms), _TINY)
    return OdeResidual(eq1_res=res, eq2_res=0.0, scale=scale)


def eq2_residual(
    params: SolitonParams, rho: float, drho: float, ddrho: float, dddrho: float
) -> OdeResidual:
    """LHS of the differentiated equation."""
    _check_rho(rho)
    terms = eq2_terms(params, rho, drho, ddrho, dddrho)
    res = terms[0] + terms[1] + terms[2] + terms[3]
    scale = max(max(abs(t) for t in terms), _TINY)
    return OdeResidual(eq1_res=0.0, eq2_res=res, scale=scale)


def residual(
    params: SolitonParams,
    rho: float,
    drho: float,
    ddrho: float,
    dddrho: float | None = None,
) -> OdeResidual:
    """Both residuals; ``dddrho`` defaults to the consistent value from eq2."""
    r1 = eq1_residual(params, rho, drho, ddrho)
    if dddrho is None:
        dddrho = rho_third(params, rho, drho, ddrho)
    r2 = eq2_residual(params, rho, drho, ddrho, dddrho)
    return OdeResidual(r1.eq1_res, r2.eq2_res, max(r1.scale, r2.scale))


def scale_transform(params: SolitonParams, state: SolitonState, b: float):
    """Image of ``(params, state)`` under ``rho(r) -> b rho(b r)``.

    Returns ``(n, b^2 lam, b^4 rbar)`` and ``(r/b, b rho, b^2 rho')``; the eq1
    residual of the image is ``b^4`` times the source residual.
    """
    if not b > 0:
        raise ValueError(f"scale factor must be positive, got {b}")
    new_params = SolitonParams(
        params.n, b * b * params.lam, b**4 * params.rbar, permissive=params.permissive
    )
    new_state = SolitonState(state.r / b, b * state.rho, b * b * state.drho)
    return new_params, new_state
