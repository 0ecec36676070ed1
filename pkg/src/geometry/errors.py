"""
Errores del toolkit bjlab.

Todas las excepciones de dominio heredan de BJLabError para que el
orquestador (bjlab.py) pueda mapearlas a un código de salida.
"""


class BJLabError(Exception):
    """Base de todos los errores de dominio"""


class ShapeMismatch(BJLabError, ValueError):
    """Un elemento o funcional no coincide con (n, d) del SpaceSpec"""


class ZeroVector(BJLabError, ValueError):
    """Se pidió el mapa de dualidad de un bloque nulo"""


class ZeroElement(BJLabError, ValueError):
    """Operación definida sólo para elementos no nulos"""


class NotSmooth(BJLabError, ValueError):
    """El espacio interior l^q no es Fréchet diferenciable (q = 1 o q = inf)"""


class UnsupportedExponent(BJLabError, ValueError):
    """Exponente exterior p fuera del rango de la operación"""


class NonFiniteValue(BJLabError, ArithmeticError):
    """La función objetivo devolvió NaN o infinito"""


class BadSpec(BJLabError, ValueError):
    """Espacio, partición u operador inválido para la construcción pedida"""


class DegenerateDraw(BJLabError):
    """El sorteo aleatorio produjo un elemento nulo; hay que volver a sortear"""
