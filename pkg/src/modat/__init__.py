"""modat: compiler toolchain for the modAT4rMS control-software modeling language.

Pipeline: ``parser`` -> ``validator`` -> ``simulator`` / ``codegen``, with
``variants`` for variant bookkeeping and the base-block change.
"""

from .parser import GRAMMAR_VERSION

__version__ = "0.1.0"

__all__ = ["GRAMMAR_VERSION", "__version__"]
