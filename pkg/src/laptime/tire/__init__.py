"""Tire property files and Magic Formula evaluation."""

from .magic_formula import MagicFormulaTire, TireOutputs
from .tir_file import TirFileError, TirParams, load_tir, parse_tir, serialize_tir

__all__ = [
    "MagicFormulaTire",
    "TireOutputs",
    "TirFileError",
    "TirParams",
    "load_tir",
    "parse_tir",
    "serialize_tir",
]
