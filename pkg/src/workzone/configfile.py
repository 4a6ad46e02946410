"""Line-based parser for the restricted key:value config dialect.

Two file kinds share this grammar: dataset configs and augmentation
pipeline configs. It is deliberately not a general markup parser; the
subset is

    # comment
    key: value
    block:
      subkey: sub value
      subkey2: other

Top-level keys start in column 0. A key with no value on its own line
opens a block whose children are indented by a consistent amount of
spaces. One nesting level only. Tabs are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass
class ConfigNode:
    """One `key: value` line plus any indented children (in file order)."""

    key: str
    value: str
    line: int
    children: list["ConfigNode"] = field(default_factory=list)


def _split_key_value(text: str, line_no: int) -> tuple[str, str]:
    if ":" not in text:
        raise ConfigError(f"expected 'key: value', got {text!r}", line=line_no)
    key, _, value = text.partition(":")
    key = key.strip()
    if not key:
        raise ConfigError("empty key", line=line_no)
    return key, value.strip()


def parse_config_lines(text: str) -> list[ConfigNode]:
    """Parse the dialect into a list of top-level nodes, order preserved."""
    nodes: list[ConfigNode] = []
    open_block: ConfigNode | None = None
    child_indent: int | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        if "\t" in raw:
            raise ConfigError("tabs are not allowed", line=line_no)
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        indent = len(stripped) - len(stripped.lstrip(" "))
        body = stripped.strip()

        if indent == 0:
            key, value = _split_key_value(body, line_no)
            node = ConfigNode(key, value, line_no)
            nodes.append(node)
            open_block = node if value == "" else None
            child_indent = None
        else:
            if open_block is None:
                raise ConfigError("indented line outside a block", line=line_no)
            if child_indent is None:
                child_indent = indent
            elif indent != child_indent:
                raise ConfigError(
                    f"inconsistent indent ({indent} spaces, block uses {child_indent})",
                    line=line_no,
                )
            key, value = _split_key_value(body, line_no)
            open_block.children.append(ConfigNode(key, value, line_no))

    return nodes


def nodes_to_map(nodes: list[ConfigNode]) -> dict[str, ConfigNode]:
    """Index top-level nodes by key, rejecting duplicates."""
    out: dict[str, ConfigNode] = {}
    for node in nodes:
        if node.key in out:
            raise ConfigError(f"duplicate key: {node.key}", line=node.line)
        out[node.key] = node
    return out
