"""Centralized plotting configuration for rodelab.

Constants for consistent figure styling across learning-curve and
role-frequency plots.
"""

# === Colors ===
PRIMARY_COLOR = "#73A89E"
PRIMARY_COMP_COLOR = "#5A8FAE"
SECONDARY_COLOR = "k"
ROLE_COLORMAP = "tab10"

# === Line Styling ===
DEFAULT_LINE_WIDTH = 2.0
THIN_LINE_WIDTH = 1.0
DEFAULT_LINE_STYLE = "-"
DASHED_LINE_STYLE = "--"

# === Marker Styling ===
DEFAULT_MARKER = "o"
DEFAULT_MARKER_SIZE = 6

# === Grid Styling ===
GRID_ENABLED = True
GRID_ALPHA = 0.5
GRID_LINE_STYLE = "--"
GRID_LINE_WIDTH = 0.6

# === Figure Sizing ===
DEFAULT_FIGURE_SIZE = (5, 3)
LARGE_FIGURE_SIZE = (8, 5)

# === Font Sizes ===
TITLE_FONT_SIZE = 12
LABEL_FONT_SIZE = 10
TICK_FONT_SIZE = 8

# === Output ===
DPI = 100
SVG_HASH_SALT = "rodelab"
