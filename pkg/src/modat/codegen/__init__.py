"""Structured Text back end."""

from .emit import EmitOptions, InvalidModel, STUnit, generate_st
from .mangle import Mangler, mangle_name

__all__ = ["EmitOptions", "InvalidModel", "STUnit", "generate_st", "Mangler", "mangle_name"]
