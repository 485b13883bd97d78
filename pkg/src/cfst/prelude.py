"""Types of the built-in channel primitives and operators."""

from functools import lru_cache

from .syntax import parse_type

_SIGNATURES = {
    "send": "forall a:1T . a -> forall b:S . !a ; b -> b",
    # continuation-passing receive: the payload and the channel continuation
    # are handed to a linear callback
    "receive": "forall a:1T . forall b:S . ?a ; b -> forall c:1T . (a -> b -o c) -o c",
    "close": "Close -> Unit",
    "wait": "Wait -> Unit",
    "+": "Int -> Int -> Int",
    "-": "Int -> Int -> Int",
    "*": "Int -> Int -> Int",
    "/": "Int -> Int -> Int",
    "==": "Int -> Int -> Bool",
    "!=": "Int -> Int -> Bool",
    "<": "Int -> Int -> Bool",
    ">": "Int -> Int -> Bool",
    "<=": "Int -> Int -> Bool",
    ">=": "Int -> Int -> Bool",
    "&&": "Bool -> Bool -> Bool",
    "||": "Bool -> Bool -> Bool",
}


@lru_cache(maxsize=None)
def _parsed() -> tuple:
    return tuple((name, parse_type(src)) for name, src in _SIGNATURES.items())


def builtins() -> dict:
    return dict(_parsed())
