"""Network files, parameter files, JSON run reports and CSV tables.

Network file grammar, one directive per line, ``#`` starts a comment::

    layer1 <n>
    layer2 <m>
    e1 <i> <j> [w]       edge inside layer 1 (0-based node indices)
    e2 <i> <j> [w]       edge inside layer 2
    inter <i> <j>        admissible interlink, only with ``pattern explicit``
    pattern all | k2k <k> | one2one | explicit
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .core import InterlayerPattern, LayerGraph, MultilayerNetwork
from .errors import InterlinkError, ParseError, ValidationError

SCHEMA_VERSION = 1
PARAMETER_KEYS = ("n", "m", "lambda2_1", "lambda2_2")


def _int(tok, line, what):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(line, f"{what} must be an integer, got {tok!r}") from None


def _float(tok, line, what):
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(line, f"{what} must be a number, got {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(line, f"{what} must be finite, got {tok!r}")
    return v


def _lines(document):
    for no, raw in enumerate(document.splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield no, text.split()


def parse_pattern_spec(tokens, n, m, line=0, pairs=()) -> InterlayerPattern:
    """Pattern from ``all``, ``one2one``, ``k2k <k>`` (or ``k2k:<k>``) and ``explicit``."""
    if len(tokens) == 1 and ":" in tokens[0]:
        tokens = tokens[0].split(":")
    kind = tokens[0]
    try:
        if kind == "all" and len(tokens) == 1:
            return InterlayerPattern.all_pairs(n, m)
        if kind == "one2one" and len(tokens) == 1:
            if n != m:
                raise ParseError(line, f"one2one needs equal layer sizes, got {n} and {m}")
            return InterlayerPattern.one_to_one(n)
        if kind == "k2k" and len(tokens) == 2:
            if n != m:
                raise ParseError(line, f"k2k needs equal layer sizes, got {n} and {m}")
            return InterlayerPattern.k_to_k(n, _int(tokens[1], line, "k"))
        if kind == "explicit" and len(tokens) == 1:
            return InterlayerPattern.explicit(n, m, pairs)
    except ParseError:
        raise
    except InterlinkError as exc:
        raise ParseError(line, str(exc)) from None
    raise ParseError(line, f"bad pattern {' '.join(tokens)!r}")


def parse_network(document: str, name="") -> MultilayerNetwork:
    """Parse a network file; the first problem found is reported with its line."""
    sizes = {}
    edges = {"e1": [], "e2": []}
    inter = []
    pattern_tokens = None
    pattern_line = 0
    for no, tok in _lines(document):
        key = tok[0]
        if key in ("layer1", "layer2"):
            if len(tok) != 2:
                raise ParseError(no, f"{key} takes one argument")
            if key in sizes:
                raise ParseError(no, f"{key} declared twice")
            size = _int(tok[1], no, "layer size")
            if size < 1:
                raise ParseError(no, f"layer size must be positive, got {size}")
            sizes[key] = size
        elif key in ("e1", "e2"):
            layer = "layer1" if key == "e1" else "layer2"
            if layer not in sizes:
                raise ParseError(no, f"{key} before {layer} is declared")
            if len(tok) not in (3, 4):
                raise ParseError(no, f"{key} takes i j [w]")
            i, j = _int(tok[1], no, "node index"), _int(tok[2], no, "node index")
            w = _float(tok[3], no, "edge weight") if len(tok) == 4 else 1.0
            for v in (i, j):
                if not 0 <= v < sizes[layer]:
                    raise ParseError(no, f"node {v} outside {layer} of size {sizes[layer]}")
            if i == j:
                raise ParseError(no, f"self-loop on node {i}")
            if w <= 0:
                raise ParseError(no, f"edge weight must be positive, got {w}")
            pair = (min(i, j), max(i, j))
            if any(e[:2] == pair for e in edges[key]):
                raise ParseError(no, f"duplicate edge {pair}")
            edges[key].append((pair[0], pair[1], w))
        elif key == "inter":
            if "layer1" not in sizes or "layer2" not in sizes:
                raise ParseError(no, "inter before both layers are declared")
            if len(tok) != 3:
                raise ParseError(no, "inter takes i j")
            i, j = _int(tok[1], no, "node index"), _int(tok[2], no, "node index")
            if not 0 <= i < sizes["layer1"]:
                raise ParseError(no, f"node {i} outside layer1 of size {sizes['layer1']}")
            if not 0 <= j < sizes["layer2"]:
                raise ParseError(no, f"node {j} outside layer2 of size {sizes['layer2']}")
            if (i, j) in inter:
                raise ParseError(no, f"duplicate interlink ({i}, {j})")
            inter.append((i, j))
            inter_line = no
        elif key == "pattern":
            if pattern_tokens is not None:
                raise ParseError(no, "pattern declared twice")
            if len(tok) < 2:
                raise ParseError(no, "pattern needs a kind")
            pattern_tokens, pattern_line = tok[1:], no
        else:
            raise ParseError(no, f"unknown directive {key!r}")
    last = max((no for no, _ in _lines(document)), default=0)
    for layer in ("layer1", "layer2"):
        if layer not in sizes:
            raise ParseError(last, f"missing {layer} declaration")
    if pattern_tokens is None:
        raise ParseError(last, "missing pattern declaration")
    if inter and pattern_tokens != ["explicit"]:
        raise ParseError(inter_line, "inter lines need 'pattern explicit'")
    n, m = sizes["layer1"], sizes["layer2"]
    pattern = parse_pattern_spec(pattern_tokens, n, m, pattern_line, inter)
    try:
        return MultilayerNetwork(LayerGraph(n, tuple(edges["e1"])), LayerGraph(m, tuple(edges["e2"])), pattern, name)
    except InterlinkError as exc:
        raise ValidationError(str(exc), [str(exc)]) from exc


def format_network(network: MultilayerNetwork) -> str:
    """Inverse of ``parse_network``."""
    out = [f"layer1 {network.n}", f"layer2 {network.m}"]
    for key, layer in (("e1", network.layer1), ("e2", network.layer2)):
        out += [f"{key} {i} {j} {format(w, '.17g')}" for i, j, w in layer.edges]
    p = network.pattern
    if p.kind == "all_pairs":
        out.append("pattern all")
    elif p.kind == "one_to_one":
        out.append("pattern one2one")
    elif p.kind == "k_to_k":
        out.append(f"pattern k2k {p.k}")
    else:
        out += [f"inter {i} {j}" for i, j in p.pairs]
        out.append("pattern explicit")
    return "\n".join(out) + "\n"


def parse_parameters(document: str) -> dict:
    """Read ``key value`` (or ``key = value``) lines with keys n, m, lambda2_1, lambda2_2."""
    out = {}
    for no, tok in _lines(document):
        tok = [t for t in " ".join(tok).replace("=", " = ").split() if t != "="]
        if len(tok) != 2:
            raise ParseError(no, "expected 'key value'")
        key, val = tok
        if key not in PARAMETER_KEYS:
            raise ParseError(no, f"unknown parameter {key!r}")
        if key in out:
            raise ParseError(no, f"{key} given twice")
        if key in ("n", "m"):
            out[key] = _int(val, no, key)
            if out[key] < 1:
                raise ParseError(no, f"{key} must be positive")
        else:
            out[key] = _float(val, no, key)
    missing = [k for k in PARAMETER_KEYS if k not in out]
    if missing:
        raise ParseError(0, f"missing parameters: {', '.join(missing)}")
    return out


def is_parameter_file(document: str) -> bool:
    for _, tok in _lines(document):
        return tok[0].split("=")[0] in PARAMETER_KEYS
    return False


# ------------------------------------------------------------------ reports


def to_tree(obj):
    """JSON-compatible tree from dataclasses, numpy values and containers."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_tree(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_tree(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_tree(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(tree, indent=2, _level=0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(tree, dict):
        if not tree:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in tree.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(tree, list):
        if not tree:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in tree):
            return "[" + ", ".join(dumps(v) for v in tree) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in tree) + "\n" + end + "]"
    if isinstance(tree, bool) or tree is None:
        return json.dumps(tree)
    if isinstance(tree, int):
        return str(tree)
    if isinstance(tree, float):
        text = format_float(tree)
        # keep floats typed as floats on reload
        if text.lstrip("-").isdigit():
            text += ".0"
        return text
    return json.dumps(tree)


def loads(text: str):
    return json.loads(text)


def run_report(command: str, inputs: dict, **sections) -> dict:
    report = {"schema_version": SCHEMA_VERSION, "command": command, "inputs": to_tree(inputs)}
    for key, val in sections.items():
        report[key] = to_tree(val)
    return report


def write_report(path, report) -> None:
    Path(path).write_text(dumps(report) + "\n", encoding="utf-8")


def csv_text(header, rows) -> str:
    """CSV with a header row; floats use '.' and 17 significant digits."""
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> None:
    Path(path).write_text(csv_text(header, rows), encoding="utf-8")


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
