"""
Configuración de experimentos bjlab
-----------------------------------
Archivos YAML con las claves:

    mode:      check-ortho | check-approx | sip | axioms | preserver-sweep | isometry-test
    space:     {p, q, n, d, weights}
    epsilons:  lista en [0, 1)   ((0, 1) para preserver-sweep)
    trials:    entero >= 1
    seed:      entero de 64 bits
    partition: índices de A (preserver-sweep / isometry-test)
    factors:   factores c_i (isometry-test)
    output:    ruta del CSV
    tol:       1e-9 por defecto
    zero_tol:  1e-12 por defecto

Las claves desconocidas se rechazan indicando campo y línea.

Author: ML Engineering Team
Version: 1.0
"""

import os
import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import yaml
from yaml.nodes import MappingNode

from src.geometry.blockspace import DEFAULT_ZERO_TOL, SpaceSpec
from src.geometry.errors import BJLabError
from src.geometry.ortho import DEFAULT_TOL
from src.geometry.preserver import AtomPartition
from src.utils.serialization import is_real, load_yaml, spec_from_mapping

logger = logging.getLogger(__name__)

MODES = ('check-ortho', 'check-approx', 'sip', 'axioms', 'preserver-sweep', 'isometry-test')
KNOWN_KEYS = ('mode', 'space', 'epsilons', 'trials', 'seed', 'partition',
              'factors', 'output', 'tol', 'zero_tol')
EPSILON_MODES = ('check-approx', 'sip', 'preserver-sweep')
MAX_SEED = 2 ** 64 - 1


class ConfigError(BJLabError, ValueError):
    """Config inválida; field y line ubican el problema"""

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        self.field = field
        self.line = line
        where = f" (línea {line})" if line is not None else ""
        super().__init__(f"{field}{where}: {message}")


@dataclass
class ExperimentConfig:
    """Experimento validado, listo para runner.run()"""
    mode: str
    spec: SpaceSpec
    epsilons: List[float] = field(default_factory=lambda: [0.0])
    trials: int = 100
    seed: int = 0
    partition: Optional[AtomPartition] = None
    factors: Optional[Tuple[float, ...]] = None
    output: Optional[str] = None
    tol: float = DEFAULT_TOL
    zero_tol: float = DEFAULT_ZERO_TOL

    @property
    def uses_epsilon(self) -> bool:
        return self.mode in EPSILON_MODES or (self.mode == 'isometry-test' and self.factors is None)


@dataclass
class RuntimeSettings:
    """Variables de entorno (.env) que afectan la ejecución, no los resultados."""
    threads: int = 1
    log_dir: Optional[str] = None

    @classmethod
    def from_env(cls) -> 'RuntimeSettings':
        raw = os.getenv('BJLAB_THREADS', '1')
        try:
            threads = max(1, int(raw))
        except ValueError:
            raise ConfigError('BJLAB_THREADS', f"debe ser un entero, recibido {raw!r}")
        return cls(threads=threads, log_dir=os.getenv('BJLAB_LOG_DIR') or None)


# ============================================================================
# PARSING
# ============================================================================

def _key_lines(node, prefix: str = '') -> Dict[str, int]:
    """Línea (1-based) de cada clave, recorriendo mappings anidados."""
    lines: Dict[str, int] = {}
    if not isinstance(node, MappingNode):
        return lines
    for key_node, value_node in node.value:
        name = f"{prefix}{key_node.value}"
        lines[name] = key_node.start_mark.line + 1
        lines.update(_key_lines(value_node, prefix=f"{name}."))
    return lines


def _real(value: Any, name: str, line: Optional[int]) -> float:
    if not is_real(value):
        raise ConfigError(name, f"se esperaba un número, recibido {value!r}", line)
    return float(value)


def _positive_int(value: Any, name: str, line: Optional[int]) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(name, f"debe ser un entero >= 1, recibido {value!r}", line)
    return value


def parse_config(text: str, mode: Optional[str] = None) -> ExperimentConfig:
    """
    Parsea y valida el YAML de un experimento.

    Args:
        text: contenido del archivo
        mode: modo pedido en la CLI; si el archivo declara otro, error
    """
    try:
        root = yaml.compose(text)
        data = load_yaml(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigError('<yaml>', str(e), mark.line + 1 if mark else None)

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError('<root>', "la config debe ser un mapping", 1)
    lines = _key_lines(root)

    for key in data:
        if key not in KNOWN_KEYS:
            raise ConfigError(str(key), "clave desconocida", lines.get(str(key)))

    # modo
    file_mode = data.get('mode')
    if mode is not None and file_mode is not None and mode != file_mode:
        raise ConfigError('mode', f"la CLI pide '{mode}' y el archivo declara '{file_mode}'",
                          lines.get('mode'))
    mode = mode or file_mode
    if mode not in MODES:
        raise ConfigError('mode', f"debe ser uno de {', '.join(MODES)}, recibido {mode!r}",
                          lines.get('mode'))

    # espacio
    if 'space' not in data:
        raise ConfigError('space', "falta la descripción del espacio")
    space = data['space']
    if isinstance(space, dict):
        for key in space:
            if key not in ('p', 'q', 'n', 'd', 'weights'):
                raise ConfigError(f"space.{key}", "clave desconocida", lines.get(f"space.{key}"))
        if isinstance(space.get('weights'), list):
            for w in space['weights']:
                _real(w, 'space.weights', lines.get('space.weights'))
    try:
        spec = spec_from_mapping(space)
    except BJLabError as e:
        raise ConfigError('space', str(e), lines.get('space'))

    config = ExperimentConfig(mode=mode, spec=spec)

    # escalares
    if 'trials' in data:
        config.trials = _positive_int(data['trials'], 'trials', lines.get('trials'))
    if 'seed' in data:
        seed = data['seed']
        if isinstance(seed, bool) or not isinstance(seed, int) or not (0 <= seed <= MAX_SEED):
            raise ConfigError('seed', f"debe ser un entero en [0, 2^64), recibido {seed!r}",
                              lines.get('seed'))
        config.seed = seed
    for key in ('tol', 'zero_tol'):
        if key in data:
            value = _real(data[key], key, lines.get(key))
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(key, f"debe ser > 0, recibido {value}", lines.get(key))
            setattr(config, key, value)
    if data.get('output') is not None:
        config.output = str(data['output'])

    # factores explícitos (isometry-test)
    if 'factors' in data:
        if mode != 'isometry-test':
            raise ConfigError('factors', "sólo aplica a isometry-test", lines.get('factors'))
        factors = data['factors']
        if not isinstance(factors, list):
            raise ConfigError('factors', "debe ser una lista", lines.get('factors'))
        factors = tuple(_real(c, 'factors', lines.get('factors')) for c in factors)
        if len(factors) != spec.n or not all(c > 0 and math.isfinite(c) for c in factors):
            raise ConfigError('factors', f"se esperaban {spec.n} factores finitos > 0",
                              lines.get('factors'))
        config.factors = factors

    # partición
    if data.get('partition') is not None:
        indices = data['partition']
        if not isinstance(indices, list) or not all(isinstance(i, int) and not isinstance(i, bool)
                                                    for i in indices):
            raise ConfigError('partition', "debe ser una lista de índices enteros",
                              lines.get('partition'))
        try:
            config.partition = AtomPartition(frozenset(indices), spec.n)
        except BJLabError as e:
            raise ConfigError('partition', str(e), lines.get('partition'))

    # epsilons
    if 'epsilons' in data:
        raw = data['epsilons']
        if not isinstance(raw, list) or not raw:
            raise ConfigError('epsilons', "debe ser una lista no vacía", lines.get('epsilons'))
        config.epsilons = [_real(e, 'epsilons', lines.get('epsilons')) for e in raw]
    elif config.uses_epsilon:
        raise ConfigError('epsilons', f"requerido para el modo {mode}")

    _validate_mode(config, lines)
    logger.debug(f"Config parseada: {config}")
    return config


def _validate_mode(config: ExperimentConfig, lines: Dict[str, int]):
    """Reglas propias de cada modo."""
    spec = config.spec
    eps_line = lines.get('epsilons')

    open_interval = config.mode == 'preserver-sweep' or (config.mode == 'isometry-test'
                                                          and config.factors is None)
    for e in config.epsilons:
        if open_interval and not (0.0 < e < 1.0):
            raise ConfigError('epsilons', f"U_eps requiere eps en (0, 1), recibido {e}", eps_line)
        if not (0.0 <= e < 1.0):
            raise ConfigError('epsilons', f"eps debe cumplir 0 <= eps < 1, recibido {e}", eps_line)

    if config.mode == 'sip' or config.mode == 'axioms':
        if spec.p <= 1:
            raise ConfigError('space.p', f"{config.mode} requiere 1 < p < inf", lines.get('space.p'))
    if config.mode in ('check-approx', 'sip', 'axioms', 'preserver-sweep'):
        if not spec.is_smooth:
            raise ConfigError('space.q', f"{config.mode} requiere 1 < q < inf", lines.get('space.q'))

    if config.mode == 'isometry-test' and config.trials < 2:
        raise ConfigError('trials', "isometry-test requiere trials >= 2", lines.get('trials'))

    if open_interval:
        # u_eps_L1 / u_eps_Lp necesitan A; u_eps_l1 sólo existe con pesos unitarios y n >= 2
        needs_partition = spec.p > 1 or not spec.unit_weights
        if needs_partition and config.partition is None:
            raise ConfigError('partition', "requerido para L^1 con pesos o para L^p",
                              lines.get('partition'))
        if config.partition is None and spec.n < 2:
            raise ConfigError('space.n', "u_eps_l1 requiere n >= 2", lines.get('space.n'))
