"""Minilang: a small typed language compiled to IR, plus a random program generator."""

from .ast import Module
from .compiler import Compiled, Location, compile_module, compile_source
from .parser import CompileError, parse
from .typecheck import check

__all__ = ["CompileError", "Compiled", "Location", "Module", "check", "compile_module",
           "compile_source", "parse"]
