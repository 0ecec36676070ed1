"""
Serialización en texto de SpaceSpec y elementos
-----------------------------------------------
- SpaceSpec: registro YAML {p, q, n, d, weights}; q = inf se escribe .inf
- BochnerElement / BlockFunctional: listas anidadas (una fila por bloque)

PyYAML representa los float con repr(), que es la representación más
corta que vuelve al mismo double, así que el ida y vuelta no pierde bits.
"""

import re
import math
import logging
from typing import Any, Dict, List, Mapping, Type, TypeVar

import yaml

from src.geometry.blockspace import BlockFunctional, BochnerElement, SpaceSpec
from src.geometry.errors import BadSpec

logger = logging.getLogger(__name__)

SPEC_KEYS = ('p', 'q', 'n', 'd', 'weights')

E = TypeVar('E', BochnerElement, BlockFunctional)


class BJLabLoader(yaml.SafeLoader):
    """SafeLoader que además lee 1e-9 (exponente sin punto) como float."""


BJLabLoader.add_implicit_resolver(
    'tag:yaml.org,2002:float',
    re.compile(r'^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$'),
    list('-+0123456789'),
)


def load_yaml(text: str) -> Any:
    return yaml.load(text, Loader=BJLabLoader)


def is_real(value: Any) -> bool:
    """int o float de YAML; bool y strings no cuentan."""
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_exponent(value: Any, name: str) -> float:
    """Acepta números, .inf o el string 'inf'."""
    if isinstance(value, str) and value.strip().lower() in ('inf', '+inf', 'infinity'):
        return math.inf
    if not is_real(value):
        raise BadSpec(f"{name} debe ser numérico o 'inf', recibido {value!r}")
    return float(value)


def spec_to_dict(spec: SpaceSpec) -> Dict[str, Any]:
    return {
        'p': float(spec.p),
        'q': float(spec.q),
        'n': int(spec.n),
        'd': int(spec.d),
        'weights': [float(w) for w in spec.weights],
    }


def spec_from_mapping(data: Mapping[str, Any]) -> SpaceSpec:
    """Construye un SpaceSpec desde un mapping ya parseado (YAML, dict)."""
    if not isinstance(data, Mapping):
        raise BadSpec(f"Se esperaba un mapping para el espacio, recibido {type(data).__name__}")
    unknown = set(data) - set(SPEC_KEYS)
    if unknown:
        raise BadSpec(f"Claves desconocidas en el espacio: {sorted(unknown)}")
    missing = [k for k in ('p', 'q', 'n', 'd') if k not in data]
    if missing:
        raise BadSpec(f"Faltan claves en el espacio: {missing}")

    n, d = data['n'], data['d']
    if isinstance(n, bool) or not isinstance(n, int) or isinstance(d, bool) or not isinstance(d, int):
        raise BadSpec(f"n y d deben ser enteros, recibido n={n!r}, d={d!r}")
    weights = data.get('weights') or ()
    if not isinstance(weights, (list, tuple)):
        raise BadSpec(f"weights debe ser una lista, recibido {weights!r}")
    bad = [w for w in weights if not is_real(w)]
    if bad:
        raise BadSpec(f"weights debe contener sólo números, recibido {bad!r}")
    return SpaceSpec(
        p=parse_exponent(data['p'], 'p'),
        q=parse_exponent(data['q'], 'q'),
        n=n,
        d=d,
        weights=tuple(float(w) for w in weights),
    )


def dump_spec(spec: SpaceSpec) -> str:
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False)


def load_spec(text: str) -> SpaceSpec:
    return spec_from_mapping(load_yaml(text))


def dump_element(f: E) -> str:
    """Una fila YAML por bloque."""
    rows: List[List[float]] = [[float(v) for v in row] for row in f.blocks]
    return yaml.safe_dump(rows, default_flow_style=None)


def load_element(text: str, cls: Type[E] = BochnerElement) -> E:
    rows = load_yaml(text)
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise BadSpec("Un elemento se serializa como lista de filas")
    return cls(rows)


def dump_witness(spec: SpaceSpec, **elements: BochnerElement) -> str:
    """Documento YAML con el espacio y elementos con nombre (para reproducir fallos)."""
    doc = {'space': spec_to_dict(spec)}
    doc.update({name: [[float(v) for v in row] for row in f.blocks] for name, f in elements.items()})
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def load_witness(text: str) -> Dict[str, Any]:
    """Inverso de dump_witness: {'space': SpaceSpec, nombre: BochnerElement, ...}"""
    doc = load_yaml(text)
    if not isinstance(doc, dict) or 'space' not in doc:
        raise BadSpec("El testigo debe contener la clave 'space'")
    out: Dict[str, Any] = {'space': spec_from_mapping(doc.pop('space'))}
    for name, rows in doc.items():
        out[name] = BochnerElement(rows)
    return out
