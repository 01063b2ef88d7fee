from __future__ import annotations

import logging

from matplotlib.colors import is_color_like, to_hex

logger = logging.getLogger(__name__)


def _parse_hex_color(value: str) -> str | None:
    """'#RRGGBB', 'RRGGBB' or a matplotlib colour name, normalized to '#rrggbb'."""
    if not isinstance(value, str):
        return None
    text = value.strip()
    if len(text) == 6 and not text.startswith("#"):
        text = "#" + text
    if not text or not is_color_like(text):
        return None
    return to_hex(text)


_DEFAULT_COLOR_MAP = {
    "l": "#0066cc",        # blue
    "l0": "#ff8c00",       # orange
    "l1": "#009900",       # green
    "twisted": "#8b008b",  # purple
}


COLOR_MAP = _DEFAULT_COLOR_MAP.copy()
DEFAULT_COLOR = "#646464"


def set_curve_color_map(overrides: dict | None) -> None:
    """Override the curve color map from config values like {'L0': '#FF8800'}"""
    COLOR_MAP.clear()
    COLOR_MAP.update(_DEFAULT_COLOR_MAP)
    if not overrides or not isinstance(overrides, dict):
        return
    for key, value in overrides.items():
        norm_key = str(key or '').strip().lower()
        if not norm_key:
            continue
        parsed = _parse_hex_color(value)
        if parsed is None:
            logger.warning("Ignoring invalid color for '%s': %r", norm_key, value)
            continue
        COLOR_MAP[norm_key] = parsed


def color_for(name: str) -> str:
    return COLOR_MAP.get(str(name).strip().lower(), DEFAULT_COLOR)


def fmt_bool(flag) -> str:
    return "ok" if flag else "FAIL"
