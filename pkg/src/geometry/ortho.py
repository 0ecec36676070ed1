"""
Ortogonalidad de Birkhoff-James (exacta y epsilon-aproximada)
-------------------------------------------------------------
Tres rutas independientes para decidir x ⊥_eps y:
1. Minimización escalar convexa (golden-section) de la desigualdad que
   define la ortogonalidad.
2. Certificado funcional: existe T con ||T|| = 1, T(x) = ||x|| y
   |T(y)| <= eps ||y||.
3. Oráculo cerrado en l^1(X) / L^1(mu, X) explotando la libertad de T
   sobre los bloques nulos de x.

Además genera pares ortogonales para el harness.

Author: ML Engineering Team
Version: 1.0
"""

import math
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from src.geometry.blockspace import (
    DEFAULT_ZERO_TOL,
    BlockFunctional,
    BochnerElement,
    CheckResult,
    SpaceSpec,
    apply_functional,
    array_norm,
    block_norms,
    bochner_norm,
    duality_rows,
    numerical_zero_threshold,
    random_element,
    support_functional,
)
from src.geometry.errors import BadSpec, NonFiniteValue, ZeroElement

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1/phi
INV_PHI_SQ = (3 - math.sqrt(5)) / 2  # 1/phi^2
MAX_ITERATIONS = 200

DEFAULT_TOL = 1e-9
# ||x + a y|| <= ||x|| obliga |a| <= 2||x||/||y||; se usa el doble
SEARCH_RADIUS_FACTOR = 4.0


@dataclass(frozen=True)
class ApproxParam:
    """Parámetro eps de la ortogonalidad aproximada (eps = 0 es B-J exacta)."""
    epsilon: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.epsilon < 1.0):
            raise BadSpec(f"eps debe cumplir 0 <= eps < 1, recibido {self.epsilon}")


EpsLike = Union[ApproxParam, float]


def as_epsilon(eps: EpsLike) -> float:
    if isinstance(eps, ApproxParam):
        return eps.epsilon
    return ApproxParam(float(eps)).epsilon


def boundary_flag(margin: float, tol: float, linear: bool = False) -> bool:
    """
    Banda de tolerancia alrededor de la frontera.

    Los márgenes de las rutas por minimización son cuadráticos en la
    distancia a la frontera; los de certificado y s.i.p. son lineales
    (en unidades de eps), de ahí la banda sqrt(tol).
    """
    lower = -10.0 * math.sqrt(tol) if linear else -10.0 * tol
    return lower <= margin <= -0.1 * tol


# ============================================================================
# MINIMIZACIÓN ESCALAR
# ============================================================================

def minimize_convex_1d(phi: Callable[[float], float], radius: float,
                       tol: float = DEFAULT_TOL,
                       xtol: Optional[float] = None) -> Tuple[float, float]:
    """
    Golden-section search de phi convexa sobre [-radius, radius].

    Valida el bracket (extremos y origen finitos), itera hasta que el
    intervalo mida menos que xtol o se alcancen MAX_ITERATIONS, y devuelve
    el mejor punto evaluado (el origen siempre es candidato).

    Returns:
        (alpha_star, phi(alpha_star))
    """
    def evaluate(alpha):
        value = float(phi(alpha))
        if not math.isfinite(value):
            raise NonFiniteValue(f"phi({alpha!r}) = {value}")
        return value

    y0 = evaluate(0.0)
    if radius <= 0 or not math.isfinite(radius):
        return 0.0, y0

    a, b = -float(radius), float(radius)
    ya, yb = evaluate(a), evaluate(b)
    if xtol is None:
        xtol = 1e-3 * tol * radius

    h = b - a
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc, yd = evaluate(c), evaluate(d)

    iterations = 0
    while h > xtol and iterations < MAX_ITERATIONS:
        if yc < yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQ * h
            yc = evaluate(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = evaluate(d)
        iterations += 1

    # en empate gana el origen
    candidates = [(y0, 0.0), (yc, c), (yd, d), (ya, -float(radius)), (yb, float(radius))]
    value, alpha = min(candidates, key=lambda t: t[0])
    return alpha, value


# ============================================================================
# RUTA 1: MINIMIZACIÓN DIRECTA
# ============================================================================

def _norms_or_raise(x: BochnerElement, y: BochnerElement, spec: SpaceSpec) -> Tuple[float, float]:
    nx = bochner_norm(x, spec)
    ny = bochner_norm(y, spec)
    if nx == 0.0:
        raise ZeroElement("La ortogonalidad se consulta desde x != 0")
    return nx, ny


def is_bj_orthogonal(x: BochnerElement, y: BochnerElement, spec: SpaceSpec,
                     tol: float = DEFAULT_TOL) -> CheckResult:
    """x ⊥ y  <=>  ||x + a y|| >= ||x|| para todo a real."""
    nx, ny = _norms_or_raise(x, y, spec)
    if ny == 0.0:
        return CheckResult(verdict=True, margin=0.0, alpha_star=0.0)

    xb, yb = x.blocks, y.blocks
    alpha, value = minimize_convex_1d(
        lambda a: array_norm(xb + a * yb, spec),
        SEARCH_RADIUS_FACTOR * nx / ny, tol,
    )
    margin = (value - nx) / nx
    return CheckResult(
        verdict=margin >= -tol,
        margin=margin,
        alpha_star=alpha,
        boundary=boundary_flag(margin, tol),
    )


def is_approx_bj_orthogonal(x: BochnerElement, y: BochnerElement, eps: EpsLike,
                            spec: SpaceSpec, tol: float = DEFAULT_TOL) -> CheckResult:
    """
    x ⊥_eps y  <=>  ||x + a y||^2 >= ||x||^2 - 2 eps ||x|| ||a y|| para todo a.

    psi(a) = ||x + a y||^2 - ||x||^2 + 2 eps ||x|| ||y|| |a| es convexa y
    psi(0) = 0, así que el margen min psi / ||x||^2 es <= 0.
    """
    epsilon = as_epsilon(eps)
    nx, ny = _norms_or_raise(x, y, spec)
    if ny == 0.0:
        return CheckResult(verdict=True, margin=0.0, alpha_star=0.0)

    xb, yb = x.blocks, y.blocks
    nx2 = nx * nx
    kink = 2.0 * epsilon * nx * ny

    def psi(a):
        return array_norm(xb + a * yb, spec) ** 2 - nx2 + kink * abs(a)

    alpha, value = minimize_convex_1d(psi, SEARCH_RADIUS_FACTOR * nx / ny, tol)
    margin = value / nx2
    return CheckResult(
        verdict=margin >= -tol,
        margin=margin,
        alpha_star=alpha,
        boundary=boundary_flag(margin, tol),
    )


# ============================================================================
# RUTA 2-3: CERTIFICADOS FUNCIONALES
# ============================================================================

def _optimal_certificate(x: BochnerElement, y: BochnerElement, spec: SpaceSpec,
                         zero_tol: float) -> Tuple[float, BlockFunctional]:
    """min_{T in J(x)} |T(y)| y un T que lo alcanza."""
    x.check_shape(spec)
    y.check_shape(spec)
    spec.require_smooth("min_certificate_value")

    if spec.p > 1:
        T = support_functional(x, spec, zero_tol)
        return abs(apply_functional(T, y, spec)), T

    norms_x = block_norms(x, spec.q)
    if not np.any(norms_x > 0):
        raise ZeroElement("J(x) requiere x != 0")
    live = norms_x > numerical_zero_threshold(norms_x, zero_tol)
    weights = spec.weights_array

    G = duality_rows(x.blocks, np.where(live, norms_x, 0.0), spec.q)
    S = float(np.dot(weights, np.einsum('ij,ij->i', G, y.blocks)))

    # Sobre Z(x) cada T_i recorre [-||y_i||, ||y_i||] escalando F_{y_i}
    norms_y = block_norms(y, spec.q)
    slack = float(np.dot(weights[~live], norms_y[~live]))
    value = max(0.0, abs(S) - slack)

    if slack > 0:
        s = min(1.0, max(-1.0, -S / slack))
        dead = ~live
        G[dead] = s * duality_rows(y.blocks[dead], norms_y[dead], spec.q)
    return value, BlockFunctional(G)


def min_certificate_value(x: BochnerElement, y: BochnerElement, spec: SpaceSpec,
                          zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """
    min sobre T en J(x) de |T(y)|.

    p = 1: max(0, |S| - sum_{i in Z(x)} mu_i ||y_i||) con
    S = sum_{i notin Z(x)} mu_i F_{x_i}(y_i).
    p > 1: |T_x(y)|, J(x) es un singleton.
    """
    value, _ = _optimal_certificate(x, y, spec, zero_tol)
    return value


def critical_epsilon(x: BochnerElement, y: BochnerElement, spec: SpaceSpec,
                     zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """Menor eps con x ⊥_eps y (0 si y = 0)."""
    ny = bochner_norm(y, spec)
    if ny == 0.0:
        return 0.0
    return min_certificate_value(x, y, spec, zero_tol) / ny


def certificate_check(x: BochnerElement, y: BochnerElement, eps: EpsLike,
                      spec: SpaceSpec, tol: float = DEFAULT_TOL,
                      zero_tol: float = DEFAULT_ZERO_TOL) -> CheckResult:
    """x ⊥_eps y  <=>  min_{T in J(x)} |T(y)| <= eps ||y||."""
    epsilon = as_epsilon(eps)
    value, T = _optimal_certificate(x, y, spec, zero_tol)
    ny = bochner_norm(y, spec)
    if ny == 0.0:
        return CheckResult(verdict=True, margin=epsilon, certificate=T)

    margin = epsilon - value / ny
    return CheckResult(
        verdict=margin >= -tol,
        margin=margin,
        certificate=T,
        boundary=boundary_flag(margin, tol, linear=True),
    )


# ============================================================================
# GENERACIÓN DE PARES
# ============================================================================

def make_orthogonal_partner(x: BochnerElement, z: BochnerElement, spec: SpaceSpec,
                            zero_tol: float = DEFAULT_ZERO_TOL) -> BochnerElement:
    """y = z - (T(z)/||x||) x con T = support_functional(x); T(y) = 0, luego x ⊥ y."""
    T = support_functional(x, spec, zero_tol)
    nx = bochner_norm(x, spec)
    return z - (apply_functional(T, z, spec) / nx) * x


def find_nonsymmetric_pair(spec: SpaceSpec, rng: np.random.Generator,
                           attempts: int = 200,
                           tol: float = DEFAULT_TOL) -> Optional[Tuple[BochnerElement, BochnerElement]]:
    """Busca (x, y) con x ⊥ y pero no y ⊥ x (ninguno en la banda de frontera)."""
    for attempt in range(attempts):
        x = random_element(spec, rng)
        y = make_orthogonal_partner(x, random_element(spec, rng), spec)
        if bochner_norm(y, spec) < 1e-6:
            continue
        forward = is_bj_orthogonal(x, y, spec, tol)
        backward = is_bj_orthogonal(y, x, spec, tol)
        if forward.verdict and not forward.boundary and not backward.verdict and not backward.boundary:
            logger.info(f"Par no simétrico encontrado en el intento {attempt + 1} "
                        f"(margen inverso {backward.margin:.3e})")
            return x, y
    logger.warning(f"⚠️ Sin par no simétrico tras {attempts} intentos")
    return None
