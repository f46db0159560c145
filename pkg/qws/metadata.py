"""Vertex role and partition cell colour configuration."""

VERTEX_COLORS = {
    'default': '#eef2ff',
    'transfer': '#fdebd0',
}

CELL_COLORS = [
    '#cfe8ff',
    '#ffe3c7',
    '#e5d9ff',
    '#d6f5d6',
    '#fff3bf',
    '#dff7ff',
    '#ffd6e7',
    '#e6ffed',
    '#e5e7eb',
]


def get_vertex_color(role: str) -> str:
    """Return a fill color for the given vertex role."""
    return VERTEX_COLORS.get(role, VERTEX_COLORS['default'])


def get_cell_color(index: int) -> str:
    """Return a fill color for the partition cell at ``index``, cycling through the palette."""
    return CELL_COLORS[index % len(CELL_COLORS)]
