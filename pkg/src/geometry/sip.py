"""
Semi-producto interno en L^p(mu, X), 1 < p < inf
-----------------------------------------------
[f, g] = (1/||g||^{p-2}) sum_{i notin Z(g)} mu_i ||g_i||^{p-1} F_{g_i}(f_i)

Como T_g = [., g]/||g|| es el funcional soporte de g, se calcula como
[f, g] = ||g|| T_g(f), forma que no genera expresiones 0^0 cuando ||g||
es pequeño.
"""

import logging
from dataclasses import dataclass

from src.geometry.blockspace import (
    DEFAULT_ZERO_TOL,
    BochnerElement,
    CheckResult,
    SpaceSpec,
    apply_functional,
    bochner_norm,
    support_functional,
)
from src.geometry.errors import UnsupportedExponent, ZeroElement
from src.geometry.ortho import DEFAULT_TOL, EpsLike, as_epsilon, boundary_flag

logger = logging.getLogger(__name__)


def _require_sip_space(spec: SpaceSpec):
    if spec.p <= 1:
        raise UnsupportedExponent(f"El s.i.p. requiere 1 < p < inf (p={spec.p})")
    spec.require_smooth("semi_inner_product")


def semi_inner_product(f: BochnerElement, g: BochnerElement, spec: SpaceSpec,
                       zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """[f, g]; vale 0 si ||g|| <= zero_tol."""
    _require_sip_space(spec)
    f.check_shape(spec)
    ng = bochner_norm(g, spec)
    if ng <= zero_tol:
        return 0.0
    return ng * apply_functional(support_functional(g, spec, zero_tol), f, spec)


@dataclass
class AxiomReport:
    """Residuos de los cuatro axiomas de Giles para una muestra."""
    linearity: float
    homogeneity: float
    cauchy_schwarz: float
    norm_identity: float
    scale: float

    def max_scaled(self) -> float:
        worst = max(self.linearity, self.homogeneity, self.cauchy_schwarz, self.norm_identity)
        return worst / self.scale

    def passed(self, rtol: float = 1e-9) -> bool:
        return self.max_scaled() <= rtol


def sip_axiom_report(f: BochnerElement, g: BochnerElement, h: BochnerElement,
                     a: float, b: float, spec: SpaceSpec,
                     zero_tol: float = DEFAULT_ZERO_TOL) -> AxiomReport:
    """
    Residuos de:
    (1) [af + bg, h] = a[f, h] + b[g, h]
    (2) [f, a g] = a [f, g]   (escalares reales)
    (3) |[f, g]| <= ||f|| ||g||
    (4) [f, f] = ||f||^2
    """
    def sip(u, v):
        return semi_inner_product(u, v, spec, zero_tol)

    nf, ng, nh = (bochner_norm(e, spec) for e in (f, g, h))
    fg = sip(f, g)

    linearity = abs(sip(a * f + b * g, h) - a * sip(f, h) - b * sip(g, h))
    homogeneity = abs(sip(f, a * g) - a * fg)
    cauchy_schwarz = max(0.0, abs(fg) - nf * ng)
    norm_identity = abs(sip(f, f) - nf ** 2)
    scale = (1 + nf) * (1 + ng) * (1 + nh) * (1 + abs(a) + abs(b)) ** 2

    return AxiomReport(linearity, homogeneity, cauchy_schwarz, norm_identity, scale)


def sip_orthogonality_criterion(x: BochnerElement, y: BochnerElement, eps: EpsLike,
                                spec: SpaceSpec, tol: float = DEFAULT_TOL,
                                zero_tol: float = DEFAULT_ZERO_TOL) -> CheckResult:
    """
    x ⊥_eps y  <=>  |[y, x]| <= eps ||x|| ||y||   (espacio suave).

    Ojo con el orden: el segundo argumento del s.i.p. es x.
    margin = eps - |[y, x]| / (||x|| ||y||).
    """
    epsilon = as_epsilon(eps)
    _require_sip_space(spec)
    nx = bochner_norm(x, spec)
    if nx == 0.0:
        raise ZeroElement("La ortogonalidad se consulta desde x != 0")
    ny = bochner_norm(y, spec)
    if ny == 0.0:
        return CheckResult(verdict=True, margin=epsilon)

    margin = epsilon - abs(semi_inner_product(y, x, spec, zero_tol)) / (nx * ny)
    return CheckResult(
        verdict=margin >= -tol,
        margin=margin,
        boundary=boundary_flag(margin, tol, linear=True),
    )
