"""Exact constant-term extraction for Elliott-rational functions.

The package computes iterated constant terms of L / prod(1 - M_i) by a
halving remainder recursion, removes slack variables by an exponential
direction substitution, and applies both to lattice-point counting:
fixed right-hand sides give counts, dilated ones give rational generating
series.  Coefficients run over exact integers or prime fields with CRT
reconstruction.
"""

__version__ = "0.1.0"

from .algebra import ExactRing, InputError, PrimeField, VariableTable
from .engine import CollisionError, Stats, TermSum
from .elimination import DEFAULT_PRIMES, LambdaExhaustion, PrimeClash
from .bruteforce import OracleRefusal
from .problems import (
    DiophantineSystem,
    RunOutcome,
    diophantine_count,
    ehrhart_series,
    knapsack_count,
    magic_square_system,
    run_pipeline,
    series_coeffs,
)
