from .registry import (
    TestFunction,
    adjust_bounds,
    get_function,
    list_functions,
    validate_registry,
)

__all__ = [
    "TestFunction",
    "adjust_bounds",
    "get_function",
    "list_functions",
    "validate_registry",
]
