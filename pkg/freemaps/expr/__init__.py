"""
Free expressions: AST, parser, evaluator and univariate series helpers.
"""
from .nodes import (
    DEFAULT_SERIES_ORDER,
    AdjVar,
    Const,
    FreeExpr,
    FreeMapHandle,
    Inv,
    Prod,
    Scale,
    Series,
    Sum,
    Var,
    evaluate,
    evaluate_map,
    scalar_function,
)
from .parser import parse, parse_many
from .series import (
    evaluate_on_nilpotent,
    nilpotency_index,
    series_from_samples,
    series_map,
)

__all__ = [
    "DEFAULT_SERIES_ORDER",
    "AdjVar",
    "Const",
    "FreeExpr",
    "FreeMapHandle",
    "Inv",
    "Prod",
    "Scale",
    "Series",
    "Sum",
    "Var",
    "evaluate",
    "evaluate_map",
    "evaluate_on_nilpotent",
    "nilpotency_index",
    "parse",
    "parse_many",
    "scalar_function",
    "series_from_samples",
    "series_map",
]
