"""Answer set programming: parser, grounder, solver, action language and planner."""
from .grounder import ground, ground_text
from .parser import parse_program, parse_rule
from .planner import NoPlan, plan
from .solver import Inconsistent, answer_sets, brute_force_answer_sets, solve_with_cr
from .terms import ProgramError

__all__ = ["ground", "ground_text", "parse_program", "parse_rule", "NoPlan", "plan", "Inconsistent",
           "answer_sets", "brute_force_answer_sets", "solve_with_cr", "ProgramError"]
