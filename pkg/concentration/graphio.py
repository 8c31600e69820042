"""
On-disk formats of the concentration app.

Graph files start with one JSON header line ``{"n": .., "directed": ..,
"weighted": ..}`` followed by ``i,j,w`` lines (0-based, ``i < j`` for
undirected graphs). Model files hold the model dictionary as JSON.
Decompositions are written as ``i,j,class`` CSV plus a JSON round trace.
"""

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from .exceptions import UnsupportedGraph
from .gp_decompose import EdgeDecomposition
from .graph_model import ProbabilityModel, SparseGraph, model_from_dict
from .utilities import to_builtin


def write_json(path, data) -> Path:
    path = Path(path)
    content = JSONRenderer().render(to_builtin(data), renderer_context={"indent": 2})
    path.write_bytes(content + b"\n")
    return path


def read_json(path):
    """
    Parse a JSON document written by write_json (or by hand).

    Raises:
        ParseError: the file is not valid JSON.
    """
    with open(path, "rb") as handle:
        return JSONParser().parse(handle)


def _format_weight(weight: float) -> str:
    return f"{weight:.17g}"


def write_graph(path, g: SparseGraph) -> Path:
    path = Path(path)
    header = {"n": g.n, "directed": g.directed, "weighted": g.weighted}
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(JSONRenderer().render(to_builtin(header)).decode("utf-8") + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        for i, j, w in g.edges():
            writer.writerow([i, j, _format_weight(w)])
    return path


def read_graph(path) -> SparseGraph:
    with open(path, encoding="utf-8", newline="") as handle:
        try:
            header = JSONParser().parse(io.BytesIO(handle.readline().encode("utf-8")))
        except ParseError as exc:
            raise UnsupportedGraph(f"{path}: the first line must be a JSON header.") from exc
        if not isinstance(header, dict) or "n" not in header:
            raise UnsupportedGraph(f"{path}: the header has no vertex count.")
        directed = bool(header.get("directed", False))
        edges = []
        for line_number, row in enumerate(csv.reader(handle), start=2):
            if not row:
                continue
            if len(row) not in (2, 3):
                raise UnsupportedGraph(f"{path}:{line_number}: expected i,j,w.")
            i, j = int(row[0]), int(row[1])
            if not directed and i >= j:
                raise UnsupportedGraph(f"{path}:{line_number}: undirected edges need i < j.")
            edges.append((i, j, float(row[2]) if len(row) == 3 else 1.0))
    return SparseGraph.from_edges(int(header["n"]), edges, directed=directed)


def write_model(path, model: ProbabilityModel) -> Path:
    return write_json(path, model.to_dict())


def read_model(path) -> ProbabilityModel:
    return model_from_dict(read_json(path))


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_weight(value) if isinstance(value, float) else value for value in row])
    return path


def write_decomposition(csv_path, trace_path, dec: EdgeDecomposition) -> None:
    write_rows(csv_path, ["i", "j", "class"], dec.pairs())
    write_json(trace_path, {"n": dec.n, "r": dec.r, "d": dec.d, "rounds": dec.trace_dicts()})
