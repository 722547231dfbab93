"""Field checks shared by the configuration dataclasses.

Each check appends `"<name>: <problem>"` to a problem list instead of
raising, so a section reports every bad field at once. Type is checked
before range, so a wrongly typed value never reaches a comparison.
"""

import math
from typing import Any, Collection, List, Optional

import numpy as np


def is_int(value: Any) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, (bool, np.bool_))


def is_real(value: Any) -> bool:
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, float, np.integer, np.floating)):
        return False
    return math.isfinite(value)


def check_int(problems: List[str], name: str, value: Any, minimum: Optional[int] = None) -> None:
    if not is_int(value):
        problems.append(f"{name}: must be an integer, got {value!r}")
    elif minimum is not None and value < minimum:
        problems.append(f"{name}: must be an integer >= {minimum}, got {value!r}")


def check_real(
    problems: List[str],
    name: str,
    value: Any,
    low: Optional[float] = None,
    high: Optional[float] = None,
    high_inclusive: bool = False,
) -> bool:
    """Require a finite number in (low, high) or (low, high]; returns whether `value` is usable."""
    if not is_real(value):
        problems.append(f"{name}: must be a finite number, got {value!r}")
        return False
    if low is not None and high is not None:
        above_high = value > high if high_inclusive else value >= high
        if value <= low or above_high:
            closing = "]" if high_inclusive else ")"
            problems.append(f"{name}: must lie in ({low:g}, {high:g}{closing}, got {value!r}")
            return False
    elif low is not None and value <= low:
        problems.append(f"{name}: must be greater than {low:g}, got {value!r}")
        return False
    return True


def check_bool(problems: List[str], name: str, value: Any) -> None:
    if not isinstance(value, (bool, np.bool_)):
        problems.append(f"{name}: must be a boolean, got {value!r}")


def check_choice(problems: List[str], name: str, value: Any, choices: Collection[str]) -> None:
    if not isinstance(value, str) or value not in choices:
        problems.append(f"{name}: must be one of {sorted(choices)}, got {value!r}")
