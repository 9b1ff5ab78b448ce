"""Final-answer scoring: normalization plus tolerant numeric comparison."""

from __future__ import annotations

from typing import Optional

_YES = {"yes", "true"}
_NO = {"no", "false"}


def _normalize(text: str) -> str:
    return " ".join(str(text).strip().lower().split())


def _as_number(text: str) -> Optional[float]:
    cleaned = text.replace(",", "").replace("$", "").strip()
    try:
        return float(cleaned)
    except ValueError:
        return None


def _is_integer_text(text: str) -> bool:
    cleaned = text.replace(",", "").replace("$", "").strip()
    if cleaned.startswith(("-", "+")):
        cleaned = cleaned[1:]
    return cleaned.isdigit()


def score_answer(expected: str, actual: str, exact_integer: bool = False) -> bool:
    """True when the answers agree after normalization.

    Yes/true and no/false each count as one class; numeric answers match
    within 1% relative tolerance. ``exact_integer`` switches counting
    answers to exact integer equality.
    """
    e = _normalize(expected)
    a = _normalize(actual)
    if e in _YES:
        return a in _YES
    if e in _NO:
        return a in _NO
    en = _as_number(e)
    an = _as_number(a)
    if en is not None and an is not None:
        if exact_integer and _is_integer_text(e) and _is_integer_text(a):
            return int(round(en)) == int(round(an))
        if en == 0:
            return an == 0
        return abs(an - en) <= 0.01 * abs(en)
    return e == a
