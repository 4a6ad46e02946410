"""Plain-text table rendering for CLI output."""
from __future__ import annotations


def format_table(headers: list[str], rows: list[list[str]], align: str = "") -> str:
    """Pad columns to their widest cell; two spaces between columns.

    ``align`` holds one character per column, 'l' or 'r'; missing
    entries default to left.
    """
    for row in rows:
        if len(row) != len(headers):
            raise ValueError(f"row width {len(row)} != header width {len(headers)}")
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def fmt(cells):
        parts = []
        for i, cell in enumerate(cells):
            a = align[i] if i < len(align) else "l"
            if a == "r":
                parts.append(cell.rjust(widths[i]))
            elif a == "l":
                parts.append(cell.ljust(widths[i]))
            else:
                raise ValueError(f"bad align character: {a!r}")
        return "  ".join(parts).rstrip()

    lines = [fmt(headers)]
    lines.append("  ".join("-" * w for w in widths).rstrip())
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)
