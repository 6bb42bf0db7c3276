"""Session-typed message passing compiled to a shared-memory heap, with an
exhaustive checker for fair, termination-preserving refinement."""

from sessrc.compiler import compile_expr, compile_program
from sessrc.explorer import ExploreLimits, explore, find_fair_lasso
from sessrc.refinement import Verdict, check_refinement, obs_equiv
from sessrc.session_types import typecheck
from sessrc.syntax import parse_src, parse_tgt, show_src, show_tgt

__all__ = [
    "ExploreLimits", "Verdict", "check_refinement", "compile_expr", "compile_program",
    "explore", "find_fair_lasso", "obs_equiv", "parse_src", "parse_tgt", "show_src",
    "show_tgt", "typecheck",
]
__version__ = "0.1.0"
