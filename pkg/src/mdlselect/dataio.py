"""
Text formats for datasets and selected models.

Matrix files
    First line: column names separated by a comma or a tab (whichever
    occurs in the header; tab wins if both do). Every following line holds
    one value per column written with ``%.17g`` so floats round-trip
    exactly. Empty cells, NaN and Inf are rejected.

Class-map files
    One ``feature_name<TAB>class_name`` line per feature. Class indices are
    assigned in order of first appearance.

Model files
    ::

        mdl-select model v1
        scheme <name>
        n <rows>
        l_theta <float>
        null_bits <float>
        tasks <task_name> ...
        classes <class_name> ...          (only with a class map)
        feature <index> <name> [<class_index>]
        add <feature_name> tasks=<t,t,...> dSE=<float> dSM=<float>
        coef <feature_name> <task> <float>
        intercept <task> <float>
        total <float>
        sha256 <hex digest of every preceding byte>

    Floats use ``repr`` and read back bit-identical.
"""

from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np

from .errors import (ChecksumMismatch, DimensionMismatch, ParseError, UnknownFeature,
                     VersionMismatch)
from .fit import Dataset
from .model import SelectionModel, Step

MODEL_HEADER = "mdl-select model v1"


# -- matrices -------------------------------------------------------------


def read_matrix(path):
    """Return ``(column_names, values)`` from a delimited numeric file."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("missing header row", path, 1)
    header = lines[0]
    delim = "\t" if "\t" in header else ","
    names = [c.strip() for c in header.split(delim)]
    if any(not c for c in names):
        raise ParseError("empty column name", path, 1)
    if len(set(names)) != len(names):
        dup = sorted({c for c in names if names.count(c) > 1})
        raise ParseError(f"duplicate column names {dup}", path, 1)
    rows = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(delim)
        if len(cells) != len(names):
            raise ParseError(f"expected {len(names)} cells, found {len(cells)}", path, no)
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", path, no, col) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {cell!r}", path, no, col)
            row.append(v)
        rows.append(row)
    values = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return names, values


def write_matrix(path, names, values, delimiter: str = ",") -> None:
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != len(names):
        raise DimensionMismatch("values must be 2-d with one column per name")
    if not np.all(np.isfinite(values)):
        raise ValueError("refusing to write NaN or Inf")
    out = [delimiter.join(names)]
    out.extend(delimiter.join("%.17g" % v for v in row) for row in values)
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


# -- class maps -----------------------------------------------------------


def read_classmap(path, feature_names):
    """Return ``(class_map, class_names)`` aligned with ``feature_names``."""
    index = {f: j for j, f in enumerate(feature_names)}
    class_of = {}
    class_names, class_index = [], {}
    for no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ParseError("expected 'feature<TAB>class'", path, no)
        feat, cls = parts[0].strip(), parts[1].strip()
        if feat not in index:
            raise UnknownFeature(f"{path}: line {no}: feature {feat!r} is not a column of X")
        if feat in class_of:
            raise ParseError(f"feature {feat!r} listed twice", path, no)
        if cls not in class_index:
            class_index[cls] = len(class_names)
            class_names.append(cls)
        class_of[feat] = class_index[cls]
    missing = [f for f in feature_names if f not in class_of]
    if missing:
        raise UnknownFeature(f"{path}: no class for feature(s) {missing[:5]}"
                             + (" ..." if len(missing) > 5 else ""))
    return np.array([class_of[f] for f in feature_names], dtype=int), class_names


def write_classmap(path, feature_names, class_map, class_names) -> None:
    lines = [f"{f}\t{class_names[c]}" for f, c in zip(feature_names, class_map)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_dataset(x_path, y_path, classmap_path=None) -> Dataset:
    """Read X, Y and an optional class map into a validated ``Dataset``."""
    fnames, x = read_matrix(x_path)
    tnames, y = read_matrix(y_path)
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has {x.shape[0]} rows, Y has {y.shape[0]}")
    class_map = class_names = None
    if classmap_path is not None:
        class_map, class_names = read_classmap(classmap_path, fnames)
    return Dataset(x, y, fnames, tnames, class_map, class_names)


def save_dataset(dataset: Dataset, x_path, y_path, classmap_path=None, delimiter=",") -> None:
    write_matrix(x_path, dataset.feature_names, dataset.x, delimiter)
    write_matrix(y_path, dataset.task_names, dataset.y, delimiter)
    if classmap_path is not None and dataset.has_classes:
        write_classmap(classmap_path, dataset.feature_names, dataset.class_map,
                       dataset.class_names)


# -- models ---------------------------------------------------------------


def dumps_model(model: SelectionModel) -> str:
    lines = [MODEL_HEADER, f"scheme {model.scheme}", f"n {model.n}",
             f"l_theta {model.l_theta!r}", f"null_bits {float(model.null_bits)!r}",
             "tasks " + " ".join(model.task_names)]
    if model.class_map is not None:
        lines.append("classes " + " ".join(model.class_names))
    for j, name in enumerate(model.feature_names):
        suffix = f" {int(model.class_map[j])}" if model.class_map is not None else ""
        lines.append(f"feature {j} {name}{suffix}")
    for s in model.steps:
        tasks = ",".join(str(t) for t in s.tasks)
        lines.append(f"add {model.feature_names[s.feature]} tasks={tasks} "
                     f"dSE={float(s.dse)!r} dSM={float(s.dsm)!r}")
    rows, cols = np.nonzero(model.support())
    for j, t in zip(rows, cols):
        lines.append(f"coef {model.feature_names[j]} {t} {float(model.coef[j, t])!r}")
    for t in range(model.h):
        lines.append(f"intercept {t} {float(model.intercept[t])!r}")
    lines.append(f"total {float(model.total_tdl)!r}")
    body = "\n".join(lines) + "\n"
    return body + f"sha256 {hashlib.sha256(body.encode('utf-8')).hexdigest()}\n"


def loads_model(text: str, path=None) -> SelectionModel:
    lines = text.split("\n")
    first = lines[0].strip() if lines else ""
    if first != MODEL_HEADER:
        if first.startswith("mdl-select model"):
            raise VersionMismatch(f"unsupported model version {first!r}")
        raise ParseError(f"expected header {MODEL_HEADER!r}", path, 1)
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if not lines or not lines[-1].startswith("sha256 "):
        raise ChecksumMismatch("missing checksum line (file truncated?)")
    body = "\n".join(lines[:-1]) + "\n"
    digest = lines[-1].split(" ", 1)[1].strip()
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != digest:
        raise ChecksumMismatch("content does not match its checksum")

    fields = {}
    features, classes, steps, coefs, intercepts = [], None, [], [], {}
    class_idx = []
    for no, line in enumerate(lines[1:-1], start=2):
        key, _, rest = line.partition(" ")
        try:
            if key in ("scheme", "n", "l_theta", "null_bits", "total"):
                fields[key] = rest
            elif key == "tasks":
                fields["tasks"] = rest.split()
            elif key == "classes":
                classes = rest.split()
            elif key == "feature":
                parts = rest.split()
                if int(parts[0]) != len(features):
                    raise ParseError("feature indices must be consecutive", path, no)
                features.append(parts[1])
                if len(parts) == 3:
                    class_idx.append(int(parts[2]))
            elif key == "add":
                name, tasks, dse, dsm = rest.split()
                steps.append((name, tuple(int(t) for t in tasks.split("=", 1)[1].split(",")),
                              float(dse.split("=", 1)[1]), float(dsm.split("=", 1)[1])))
            elif key == "coef":
                name, t, v = rest.split()
                coefs.append((name, int(t), float(v)))
            elif key == "intercept":
                t, v = rest.split()
                intercepts[int(t)] = float(v)
            else:
                raise ParseError(f"unrecognized record {key!r}", path, no)
        except (ValueError, IndexError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed {key!r} record", path, no) from None
    index = {f: j for j, f in enumerate(features)}
    tasks = fields.get("tasks", [])
    coef = np.zeros((len(features), len(tasks)))
    for name, t, v in coefs:
        coef[index[name], t] = v
    intercept = np.array([intercepts.get(t, 0.0) for t in range(len(tasks))])
    model = SelectionModel(
        fields["scheme"], features, tasks, int(fields["n"]), float(fields["null_bits"]),
        [Step(index[name], ts, dse, dsm) for name, ts, dse, dsm in steps], coef, intercept,
        float(fields["total"]),
        np.array(class_idx, dtype=int) if classes is not None else None, classes,
        float(fields["l_theta"]))
    return model


def save_model(model: SelectionModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path) -> SelectionModel:
    return loads_model(Path(path).read_text(encoding="utf-8"), path)
