"""
Espacio de Bochner Discretizado - L^p(mu, l^q_d)
------------------------------------------------
Modelo finito del espacio de Lebesgue-Bochner: n átomos con masas mu_i,
cada uno con un bloque en R^d normado con l^q. Todas las integrales son
sumas finitas.

Contiene:
1. Tipos de dominio (SpaceSpec, BochnerElement, BlockFunctional, CheckResult)
2. Normas interior (l^q) y exterior (Bochner)
3. Mapa de dualidad F_v (derivada de Fréchet de la norma)
4. Funcionales soporte en l^1(X), L^1(mu, X) y L^p(mu, X)

Author: ML Engineering Team
Version: 1.0
"""

import math
import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence, Tuple

import numpy as np

from src.geometry.errors import (
    BadSpec,
    NotSmooth,
    ShapeMismatch,
    ZeroElement,
    ZeroVector,
)

logger = logging.getLogger(__name__)

DEFAULT_ZERO_TOL = 1e-12


def dual_exponent(r: float) -> float:
    """Exponente conjugado r* con 1/r + 1/r* = 1 (1 <-> inf)."""
    if r == 1:
        return math.inf
    if math.isinf(r):
        return 1.0
    return r / (r - 1.0)


# ============================================================================
# TIPOS DE DOMINIO
# ============================================================================

@dataclass(frozen=True)
class SpaceSpec:
    """
    Espacio discretizado L^p(mu, X) con X = l^q_d.

    Args:
        p: exponente exterior, 1 <= p < inf
        q: exponente interior, 1 <= q <= inf (math.inf como centinela)
        n: número de átomos
        d: dimensión de cada bloque
        weights: masas mu_i > 0 (por defecto todas 1)
    """
    p: float
    q: float
    n: int
    d: int
    weights: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.weights:
            object.__setattr__(self, 'weights', (1.0,) * int(self.n))
        object.__setattr__(self, 'weights', tuple(float(w) for w in self.weights))

        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise BadSpec(f"n debe ser un entero >= 1, recibido {self.n!r}")
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise BadSpec(f"d debe ser un entero >= 1, recibido {self.d!r}")
        if not (1.0 <= self.p < math.inf):
            raise BadSpec(f"p debe cumplir 1 <= p < inf, recibido {self.p}")
        if not (self.q >= 1.0):
            raise BadSpec(f"q debe cumplir q >= 1, recibido {self.q}")
        if len(self.weights) != self.n:
            raise BadSpec(f"Se esperaban {self.n} pesos, recibidos {len(self.weights)}")
        if not all(math.isfinite(w) and w > 0 for w in self.weights):
            raise BadSpec(f"Todos los pesos deben ser finitos y > 0: {self.weights}")

    @property
    def weights_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def p_dual(self) -> float:
        return dual_exponent(self.p)

    @property
    def q_dual(self) -> float:
        return dual_exponent(self.q)

    @property
    def is_smooth(self) -> bool:
        """True si la norma de l^q_d es Fréchet diferenciable (1 < q < inf)."""
        return 1.0 < self.q < math.inf

    @property
    def unit_weights(self) -> bool:
        return all(w == 1.0 for w in self.weights)

    def require_smooth(self, operation: str):
        if not self.is_smooth:
            raise NotSmooth(f"{operation} requiere 1 < q < inf (q={self.q})")

    def measure(self, indices) -> float:
        """mu(A) para un conjunto de índices de átomos."""
        return float(sum(self.weights[i] for i in indices))


class _BlockArray:
    """Arreglo (n, d) inmutable de valores finitos."""

    __slots__ = ('blocks',)
    # escalares numpy delegan en __rmul__
    __array_ufunc__ = None

    def __init__(self, blocks):
        arr = np.array(blocks, dtype=float, copy=True)
        if arr.ndim != 2:
            raise ShapeMismatch(f"Se esperaba un arreglo (n, d), recibido ndim={arr.ndim}")
        if not np.all(np.isfinite(arr)):
            raise BadSpec("Todas las entradas deben ser finitas")
        arr.setflags(write=False)
        object.__setattr__(self, 'blocks', arr)

    def __reduce__(self):
        return (type(self), (self.blocks,))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} es inmutable")

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def d(self) -> int:
        return self.blocks.shape[1]

    def check_shape(self, spec: SpaceSpec):
        if self.blocks.shape != (spec.n, spec.d):
            raise ShapeMismatch(
                f"{type(self).__name__} con forma {self.blocks.shape}, "
                f"el espacio pide ({spec.n}, {spec.d})"
            )

    def is_zero(self) -> bool:
        return not np.any(self.blocks)

    def tolist(self):
        return self.blocks.tolist()

    def __repr__(self):
        return f"{type(self).__name__}({self.blocks.tolist()!r})"

    @classmethod
    def zeros(cls, spec: SpaceSpec):
        return cls(np.zeros((spec.n, spec.d)))


class BochnerElement(_BlockArray):
    """f en L^p(mu, X): bloque i = f(s_i)."""

    __slots__ = ()

    def __add__(self, other: 'BochnerElement') -> 'BochnerElement':
        return BochnerElement(self.blocks + other.blocks)

    def __sub__(self, other: 'BochnerElement') -> 'BochnerElement':
        return BochnerElement(self.blocks - other.blocks)

    def __mul__(self, scalar: float) -> 'BochnerElement':
        return BochnerElement(float(scalar) * self.blocks)

    __rmul__ = __mul__

    def __neg__(self) -> 'BochnerElement':
        return BochnerElement(-self.blocks)


class BlockFunctional(_BlockArray):
    """G en L^{p*}(mu, X*): T(g) = sum_i mu_i G_i . g_i"""

    __slots__ = ()


@dataclass
class CheckResult:
    """
    Resultado de una consulta de ortogonalidad.

    margin es la distancia con signo a la frontera de la desigualdad que
    define la consulta; verdict == (margin >= -tol). boundary marca los
    casos dentro de la banda de tolerancia.
    """
    verdict: bool
    margin: float
    alpha_star: Optional[float] = None
    certificate: Optional[BlockFunctional] = None
    boundary: bool = False


# ============================================================================
# NORMAS
# ============================================================================

def _row_norms(rows: np.ndarray, q: float) -> np.ndarray:
    """Normas l^q de cada fila, escaladas por el máximo para evitar overflow."""
    a = np.abs(np.atleast_2d(rows))
    if a.shape[1] == 0:
        return np.zeros(a.shape[0])
    scale = a.max(axis=1)
    if math.isinf(q):
        return scale
    safe = np.where(scale > 0, scale, 1.0)
    r = a / safe[:, None]
    if q == 1:
        s = r.sum(axis=1)
    elif q == 2:
        s = np.sqrt((r * r).sum(axis=1))
    else:
        s = (r ** q).sum(axis=1) ** (1.0 / q)
    return np.where(scale > 0, scale * s, 0.0)


def _weighted_lp(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """(sum_i mu_i |v_i|^p)^(1/p) para v_i >= 0, con escalamiento."""
    m = float(values.max()) if values.size else 0.0
    if m == 0.0:
        return 0.0
    r = values / m
    return m * float(np.dot(weights, r ** p)) ** (1.0 / p)


def inner_norm(v: Sequence[float], q: float) -> float:
    """||v||_q en X = l^q_d."""
    arr = np.asarray(v, dtype=float).reshape(1, -1)
    return float(_row_norms(arr, q)[0])


def block_norms(f: _BlockArray, q: float) -> np.ndarray:
    """Vector (||f_1||_q, ..., ||f_n||_q)."""
    return _row_norms(f.blocks, q)


def bochner_norm(f: BochnerElement, spec: SpaceSpec) -> float:
    """||f|| = (sum_i mu_i ||f_i||_q^p)^(1/p)"""
    f.check_shape(spec)
    return array_norm(f.blocks, spec)


def array_norm(blocks: np.ndarray, spec: SpaceSpec) -> float:
    """Norma de Bochner de un arreglo crudo (n, d); sin validación de forma."""
    return _weighted_lp(_row_norms(blocks, spec.q), spec.weights_array, spec.p)


def numerical_zero_threshold(norms: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """Umbral de cero relativo a la mayor norma de bloque."""
    return zero_tol * float(norms.max()) if norms.size else 0.0


def zero_set(f: _BlockArray, spec: SpaceSpec, tol: float = DEFAULT_ZERO_TOL) -> FrozenSet[int]:
    """
    Z(f) = { i : ||f_i||_q <= tol * max_j ||f_j||_q }, con la norma l^q del espacio.

    tol es relativo a la mayor norma de bloque; tol = 0 da los bloques
    exactamente nulos.
    """
    if tol < 0:
        raise ValueError(f"tol debe ser >= 0, recibido {tol}")
    f.check_shape(spec)
    norms = block_norms(f, spec.q)
    return frozenset(int(i) for i in np.flatnonzero(norms <= numerical_zero_threshold(norms, tol)))


# ============================================================================
# MAPA DE DUALIDAD
# ============================================================================

def duality_rows(rows: np.ndarray, norms: np.ndarray, q: float) -> np.ndarray:
    """F_{v} fila a fila; filas con norma 0 quedan en 0."""
    safe = np.where(norms > 0, norms, 1.0)
    u = rows / safe[:, None]
    out = np.sign(u) * np.abs(u) ** (q - 1.0)
    out[norms <= 0] = 0.0
    return out


def inner_duality_map(v: Sequence[float], q: float) -> np.ndarray:
    """
    Funcional soporte único F_v en l^q_d (1 < q < inf).

    F_v(v) = ||v||_q y ||F_v||_{q*} = 1. Para a != 0, F_{a v} = sign(a) F_v.
    """
    if not (1.0 < q < math.inf):
        raise NotSmooth(f"El mapa de dualidad de l^q es multivaluado para q={q}")
    arr = np.asarray(v, dtype=float).reshape(1, -1)
    norms = _row_norms(arr, q)
    if norms[0] == 0.0:
        raise ZeroVector("F_v no está definido para v = 0")
    return duality_rows(arr, norms, q)[0]


# ============================================================================
# FUNCIONALES
# ============================================================================

def apply_functional(T: BlockFunctional, g: BochnerElement, spec: SpaceSpec) -> float:
    """T(g) = sum_i mu_i (T_i . g_i)"""
    T.check_shape(spec)
    g.check_shape(spec)
    per_block = np.einsum('ij,ij->i', T.blocks, g.blocks)
    return float(np.dot(spec.weights_array, per_block))


def functional_norm(T: BlockFunctional, spec: SpaceSpec) -> float:
    """
    Norma dual de T.

    p = 1: max_i ||T_i||_{q*}   (dual l^inf(X*))
    p > 1: (sum_i mu_i ||T_i||_{q*}^{p*})^(1/p*)
    """
    T.check_shape(spec)
    dual_norms = _row_norms(T.blocks, spec.q_dual)
    if spec.p == 1:
        return float(dual_norms.max())
    return _weighted_lp(dual_norms, spec.weights_array, spec.p_dual)


def support_functional(f: BochnerElement, spec: SpaceSpec,
                       zero_tol: float = DEFAULT_ZERO_TOL) -> BlockFunctional:
    """
    Funcional soporte canónico T en J(f).

    p = 1: G_i = F_{f_i} en bloques no nulos y G_i = 0 en Z(f). Cualquier
    G_i con ||G_i|| <= 1 sobre Z(f) también es soporte; esa libertad se
    explota en ortho.min_certificate_value.
    p > 1: G_i = (||f_i||^{p-1} / ||f||^{p-1}) F_{f_i}, el único elemento de J(f).
    """
    f.check_shape(spec)
    spec.require_smooth("support_functional")
    norms = block_norms(f, spec.q)
    if not np.any(norms > 0):
        raise ZeroElement("J(f) requiere f != 0")

    threshold = numerical_zero_threshold(norms, zero_tol)
    live = norms > threshold
    if not np.all(live):
        logger.debug(f"support_functional: {int((~live).sum())} bloques en Z(f)")

    masked = np.where(live, norms, 0.0)
    G = duality_rows(f.blocks, masked, spec.q)
    if spec.p > 1:
        total = _weighted_lp(masked, spec.weights_array, spec.p)
        G = G * ((masked / total) ** (spec.p - 1.0))[:, None]
    return BlockFunctional(G)


# ============================================================================
# MUESTREO
# ============================================================================

def random_element(spec: SpaceSpec, rng: np.random.Generator,
                   min_norm: float = 1e-6, max_attempts: int = 100) -> BochnerElement:
    """Bloques con entradas N(0,1) i.i.d.; rechaza ||f|| < min_norm."""
    for _ in range(max_attempts):
        f = BochnerElement(rng.standard_normal((spec.n, spec.d)))
        if bochner_norm(f, spec) >= min_norm:
            return f
    raise ZeroElement(f"No se obtuvo un elemento con norma >= {min_norm}")
