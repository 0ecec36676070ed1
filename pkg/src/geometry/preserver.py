"""
Operadores U_eps que preservan la ortogonalidad aproximada
----------------------------------------------------------
Operadores en l^1(X), L^1(mu, X) y L^p(mu, X) que preservan la
eps-ortogonalidad sin ser múltiplos escalares de una isometría:

- l^1:  U(x) = ((1-eps) x_1, x_2, ...)
- L^1:  U(f) = (1-eps) f chi_A + f chi_{S \\ A}
- L^p:  U(f) = f chi_A + (1-eps/p) f chi_{S \\ A}

Todos son escalamientos por bloque (ScalingOperator). El módulo incluye
los testigos h_alpha de no-isometría, el detector de "múltiplo escalar
de una isometría" y el ensayo de preservación que reproduce cada teorema.

Author: ML Engineering Team
Version: 1.0
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Sequence, Tuple

import numpy as np

from src.geometry.blockspace import (
    DEFAULT_ZERO_TOL,
    BochnerElement,
    SpaceSpec,
    bochner_norm,
    inner_norm,
    random_element,
)
from src.geometry.errors import BadSpec, DegenerateDraw, ShapeMismatch
from src.geometry.ortho import (
    DEFAULT_TOL,
    EpsLike,
    as_epsilon,
    certificate_check,
    critical_epsilon,
    is_approx_bj_orthogonal,
    is_bj_orthogonal,
    make_orthogonal_partner,
)
from src.geometry.sip import sip_orthogonality_criterion

logger = logging.getLogger(__name__)

# {0, +-10^k : k = -3..6}
ALPHA_GRID = (0.0,) + tuple(s * 10.0 ** k for k in range(-3, 7) for s in (1.0, -1.0))
MIN_DRAW_NORM = 1e-6


# ============================================================================
# TIPOS
# ============================================================================

@dataclass(frozen=True)
class AtomPartition:
    """A ⊂ {0..n-1} no vacío con complemento no vacío."""
    A: FrozenSet[int]
    n: int

    def __post_init__(self):
        object.__setattr__(self, 'A', frozenset(int(i) for i in self.A))
        if not self.A:
            raise BadSpec("La partición requiere A no vacío")
        if any(i < 0 or i >= self.n for i in self.A):
            raise BadSpec(f"Índices de A fuera de 0..{self.n - 1}: {sorted(self.A)}")
        if len(self.A) == self.n:
            raise BadSpec("El complemento de A no puede ser vacío")

    @property
    def complement(self) -> FrozenSet[int]:
        return frozenset(range(self.n)) - self.A

    @classmethod
    def first(cls, k: int, n: int) -> 'AtomPartition':
        """A = primeros k átomos."""
        return cls(frozenset(range(k)), n)


@dataclass(frozen=True)
class ScalingOperator:
    """U(f)_i = c_i f_i con c_i > 0."""
    factors: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'factors', tuple(float(c) for c in self.factors))
        if not self.factors:
            raise BadSpec("Un ScalingOperator necesita al menos un factor")
        if not all(math.isfinite(c) and c > 0 for c in self.factors):
            raise BadSpec(f"Todos los factores deben ser finitos y > 0: {self.factors}")

    @property
    def bound(self) -> float:
        """Cota ||U f|| <= max c_i ||f||."""
        return max(self.factors)

    def check(self, spec: SpaceSpec):
        if len(self.factors) != spec.n:
            raise ShapeMismatch(f"{len(self.factors)} factores para n={spec.n} átomos")

    @classmethod
    def identity(cls, n: int, scale: float = 1.0) -> 'ScalingOperator':
        return cls((scale,) * n)


@dataclass
class TrialRecord:
    """Un ensayo de preservación: par ortogonal (x, y) y veredictos sobre (Ux, Uy)."""
    seed: int
    trial: int
    spec: SpaceSpec
    epsilon: float
    x: BochnerElement
    y: BochnerElement
    verdicts: Dict[str, bool] = field(default_factory=dict)
    margins: Dict[str, float] = field(default_factory=dict)
    functional_route: str = ''
    critical_epsilon: float = float('nan')
    boundary: bool = False

    @property
    def status(self) -> str:
        if self.boundary:
            return 'boundary'
        return 'pass' if all(self.verdicts.values()) else 'fail'

    def to_row(self) -> dict:
        row = {
            'seed': self.seed,
            'trial': self.trial,
            'p': self.spec.p,
            'q': self.spec.q,
            'n': self.spec.n,
            'd': self.spec.d,
            'epsilon': self.epsilon,
        }
        for route in ('exact', 'direct', 'functional'):
            row[f'{route}_verdict'] = self.verdicts.get(route)
            row[f'{route}_margin'] = self.margins.get(route)
        row['functional_route'] = self.functional_route
        row['critical_epsilon'] = self.critical_epsilon
        row['boundary'] = self.boundary
        row['status'] = self.status
        return row


# ============================================================================
# CONSTRUCCIÓN DE U_eps
# ============================================================================

def _open_epsilon(eps: EpsLike) -> float:
    epsilon = as_epsilon(eps)
    if epsilon <= 0.0:
        raise BadSpec(f"U_eps requiere eps en (0, 1), recibido {epsilon}")
    return epsilon


def _check_partition(part: AtomPartition, spec: SpaceSpec):
    if part.n != spec.n:
        raise BadSpec(f"Partición sobre {part.n} átomos, el espacio tiene {spec.n}")


def u_eps_l1(eps: EpsLike, spec: SpaceSpec) -> ScalingOperator:
    """l^1(X): factores (1-eps, 1, ..., 1)."""
    epsilon = _open_epsilon(eps)
    if spec.p != 1 or not spec.unit_weights:
        raise BadSpec("u_eps_l1 requiere p = 1 y mu_i = 1 (l^1(X))")
    if spec.n < 2:
        raise BadSpec("u_eps_l1 requiere n >= 2")
    return ScalingOperator((1.0 - epsilon,) + (1.0,) * (spec.n - 1))


def u_eps_L1(eps: EpsLike, part: AtomPartition, spec: SpaceSpec) -> ScalingOperator:
    """L^1(mu, X): c_i = 1-eps en A, 1 fuera de A."""
    epsilon = _open_epsilon(eps)
    if spec.p != 1:
        raise BadSpec(f"u_eps_L1 requiere p = 1 (p={spec.p})")
    _check_partition(part, spec)
    return ScalingOperator(tuple(1.0 - epsilon if i in part.A else 1.0 for i in range(spec.n)))


def u_eps_Lp(eps: EpsLike, part: AtomPartition, spec: SpaceSpec) -> ScalingOperator:
    """L^p(mu, X), 1 < p < inf: c_i = 1 en A, 1-eps/p fuera de A."""
    epsilon = _open_epsilon(eps)
    if not spec.p > 1:
        raise BadSpec(f"u_eps_Lp requiere 1 < p < inf (p={spec.p})")
    _check_partition(part, spec)
    shrink = 1.0 - epsilon / spec.p
    return ScalingOperator(tuple(1.0 if i in part.A else shrink for i in range(spec.n)))


def build_operator(eps: EpsLike, spec: SpaceSpec,
                   part: Optional[AtomPartition] = None) -> ScalingOperator:
    """Elige la construcción que corresponde al espacio."""
    if spec.p > 1:
        if part is None:
            raise BadSpec("L^p requiere una partición A")
        return u_eps_Lp(eps, part, spec)
    if part is None:
        return u_eps_l1(eps, spec)
    return u_eps_L1(eps, part, spec)


def apply_operator(U: ScalingOperator, f: BochnerElement) -> BochnerElement:
    """Escalamiento bloque a bloque."""
    if len(U.factors) != f.n:
        raise ShapeMismatch(f"{len(U.factors)} factores para {f.n} bloques")
    return BochnerElement(np.asarray(U.factors)[:, None] * f.blocks)


def lp_contraction_gap(eps: float, p: float) -> float:
    """1 - (1 - eps/p)^p - eps; es <= 0 para eps en (0,1) y p > 1."""
    return 1.0 - (1.0 - eps / p) ** p - eps


# ============================================================================
# TESTIGOS DE NO-ISOMETRÍA
# ============================================================================

def h_alpha_witness(alpha: float, part: AtomPartition, x0: Sequence[float],
                    spec: SpaceSpec, B: Optional[Iterable[int]] = None) -> BochnerElement:
    """
    h_alpha = chi_A x0 + alpha chi_B x0 con ||x0||_q = 1.

    B por defecto es el complemento de A. Para p = 1,
    ||h_alpha|| = mu(A) + |alpha| mu(B).
    """
    _check_partition(part, spec)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (spec.d,) or abs(inner_norm(x0, spec.q) - 1.0) > 1e-12:
        raise BadSpec("x0 debe ser un vector unitario de dimensión d")
    B = part.complement if B is None else frozenset(int(i) for i in B)
    if not B or B & part.A or any(i < 0 or i >= spec.n for i in B):
        raise BadSpec(f"B debe ser no vacío y disjunto de A: B={sorted(B)}")

    blocks = np.zeros((spec.n, spec.d))
    blocks[sorted(part.A)] = x0
    blocks[sorted(B)] = alpha * x0
    return BochnerElement(blocks)


def witness_ratio(U: ScalingOperator, alpha: float, part: AtomPartition,
                  x0: Sequence[float], spec: SpaceSpec,
                  B: Optional[Iterable[int]] = None) -> float:
    """||U h_alpha|| / ||h_alpha||"""
    h = h_alpha_witness(alpha, part, x0, spec, B)
    return bochner_norm(apply_operator(U, h), spec) / bochner_norm(h, spec)


def is_scalar_multiple_of_isometry(U: ScalingOperator, spec: SpaceSpec,
                                   trials: int = 100, tol: float = 1e-12,
                                   rng: Optional[np.random.Generator] = None) -> Tuple[bool, float]:
    """
    ¿||U f|| = c ||f|| para un c fijo?

    Evalúa r(f) = ||U f|| / ||f|| sobre la familia h_alpha (A = {0},
    B = {j} para cada j, alpha en ALPHA_GRID) y sobre `trials` elementos
    aleatorios. spread = (max r - min r) / max r.
    """
    if trials < 2:
        raise ValueError(f"trials debe ser >= 2, recibido {trials}")
    U.check(spec)
    rng = rng if rng is not None else np.random.default_rng(0)

    ratios = []
    x0 = np.zeros(spec.d)
    x0[0] = 1.0
    if spec.n >= 2:
        part = AtomPartition(frozenset({0}), spec.n)
        for j in range(1, spec.n):
            for alpha in ALPHA_GRID:
                ratios.append(witness_ratio(U, alpha, part, x0, spec, B={j}))
    for _ in range(trials):
        f = random_element(spec, rng)
        ratios.append(bochner_norm(apply_operator(U, f), spec) / bochner_norm(f, spec))

    r_min, r_max = min(ratios), max(ratios)
    spread = (r_max - r_min) / r_max
    logger.debug(f"Razones ||Uf||/||f|| en [{r_min:.6g}, {r_max:.6g}], spread={spread:.3e}")
    return spread <= tol, spread


# ============================================================================
# ENSAYOS DE PRESERVACIÓN
# ============================================================================

def preservation_trial(U: ScalingOperator, eps: EpsLike, spec: SpaceSpec,
                       rng: np.random.Generator, tol: float = DEFAULT_TOL,
                       zero_tol: float = DEFAULT_ZERO_TOL,
                       seed: int = 0, trial: int = 0) -> TrialRecord:
    """
    Sortea x y z, construye y ⊥ x y verifica U x ⊥_eps U y por la ruta
    directa (minimización de psi) y por la ruta funcional (certificado si
    p = 1, s.i.p. si p > 1). El teorema predice todos los veredictos True.
    """
    epsilon = as_epsilon(eps)
    U.check(spec)

    x = random_element(spec, rng, MIN_DRAW_NORM)
    z = random_element(spec, rng, MIN_DRAW_NORM)
    y = make_orthogonal_partner(x, z, spec, zero_tol)
    if bochner_norm(y, spec) < MIN_DRAW_NORM * bochner_norm(z, spec):
        raise DegenerateDraw(f"y = 0 en el ensayo {trial}")

    exact = is_bj_orthogonal(x, y, spec, tol)
    ux, uy = apply_operator(U, x), apply_operator(U, y)
    direct = is_approx_bj_orthogonal(ux, uy, epsilon, spec, tol)
    if spec.p == 1:
        route = 'certificate'
        functional = certificate_check(ux, uy, epsilon, spec, tol, zero_tol)
    else:
        route = 'sip'
        functional = sip_orthogonality_criterion(ux, uy, epsilon, spec, tol, zero_tol)

    checks = {'exact': exact, 'direct': direct, 'functional': functional}
    return TrialRecord(
        seed=seed,
        trial=trial,
        spec=spec,
        epsilon=epsilon,
        x=x,
        y=y,
        verdicts={k: bool(r.verdict) for k, r in checks.items()},
        margins={k: float(r.margin) for k, r in checks.items()},
        functional_route=route,
        critical_epsilon=critical_epsilon(ux, uy, spec, zero_tol),
        boundary=any(r.boundary for r in checks.values()),
    )


def tightness_probe(U: ScalingOperator, eps: EpsLike, spec: SpaceSpec,
                    rng: np.random.Generator, trials: int = 200,
                    zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """
    Mayor eps crítico observado sobre imágenes (U x, U y) de pares x ⊥ y.

    Valores cercanos a eps indican que la constante de la construcción se
    usa de verdad; nunca debería superar eps.
    """
    epsilon = as_epsilon(eps)
    U.check(spec)
    worst = 0.0
    for _ in range(trials):
        x = random_element(spec, rng, MIN_DRAW_NORM)
        y = make_orthogonal_partner(x, random_element(spec, rng, MIN_DRAW_NORM), spec, zero_tol)
        if bochner_norm(y, spec) < MIN_DRAW_NORM:
            continue
        worst = max(worst, critical_epsilon(apply_operator(U, x), apply_operator(U, y), spec, zero_tol))
    logger.info(f"Tightness: eps crítico máximo {worst:.4f} (eps={epsilon})")
    return worst
