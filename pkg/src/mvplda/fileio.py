"""Text file formats: features, models, trials and scores.

All numbers are written with 17 significant digits, so a write/read
round trip reproduces every float exactly.

Feature file::

    MVPLDA-FEATURES 1 <d>
    <label_a> <label_b> <x_1> ... <x_d>

Model file (``B`` replaces ``S``/``T`` for plain PLDA)::

    MVPLDA-MODEL 1 jplda <d>
    MU <d>
    <d values>
    S <d> <n_u>
    <d rows of n_u values>
    T <d> <n_v>
    <d rows of n_v values>
    SIGMA <d>
    <d values>

Trial file, one trial per line; the enrollment side lists feature-row
indices (0-based, data rows only) separated by commas::

    <i,j,k> <test row> <TGT|IW|TW|IC>
"""

import io

import numpy as np

from .data import Dataset
from .errors import (
    DimMismatch,
    EmptyDataset,
    FormatError,
    MalformedHeader,
    MissingSection,
    NonFiniteValue,
    RowArityError,
)
from .evaluation import TRIAL_TYPES, Trial
from .jplda import JointPldaModel
from .plda import PldaModel

FEATURE_TAG = "MVPLDA-FEATURES"
MODEL_TAG = "MVPLDA-MODEL"
FORMAT_VERSION = "1"


def _fmt(values):
    return " ".join(f"{v:.17g}" for v in values)


def _text(source):
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def write_features(dataset, stream=None):
    """Write ``dataset`` with its original label ids. Returns the text when ``stream`` is None."""
    out = io.StringIO() if stream is None else stream
    out.write(f"{FEATURE_TAG} {FORMAT_VERSION} {dataset.dim}\n")
    label_a, label_b = dataset.original_labels()
    for a, b, row in zip(label_a, label_b, dataset.x):
        out.write(f"{a} {b} {_fmt(row)}\n")
    return out.getvalue() if stream is None else None


def parse_features(source):
    """Read a feature file into a :class:`Dataset` with dense labels.

    ``source`` is a text stream or a string holding the whole file.
    """
    lines = iter(_text(source))
    header = next(lines, "").split()
    if len(header) != 3 or header[0] != FEATURE_TAG or header[1] != FORMAT_VERSION:
        raise MalformedHeader(f"expected '{FEATURE_TAG} {FORMAT_VERSION} <d>'", line=1)
    try:
        d = int(header[2])
    except ValueError:
        raise MalformedHeader("dimension is not an integer", line=1) from None
    if d < 1:
        raise MalformedHeader("dimension must be positive", line=1)
    labels, rows = [], []
    for lineno, line in enumerate(lines, start=2):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) != d + 2:
            raise RowArityError(f"expected {d + 2} fields, found {len(parts)}", line=lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError("labels must be integers", line=lineno) from None
        if a < 0 or b < 0:
            raise FormatError("labels must be non-negative", line=lineno)
        try:
            values = [float(v) for v in parts[2:]]
        except ValueError:
            raise NonFiniteValue("unparseable feature value", line=lineno) from None
        if not all(np.isfinite(values)):
            raise NonFiniteValue("non-finite feature value", line=lineno)
        labels.append((a, b))
        rows.append(values)
    if not rows:
        raise EmptyDataset("feature file has no data rows")
    labels = np.array(labels, dtype=np.int64)
    return Dataset.from_labels(np.array(rows), labels[:, 0], labels[:, 1])


def _int(token, lineno):
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"expected an integer, found {token!r}", line=lineno) from None


def serialize_model(model):
    if isinstance(model, JointPldaModel):
        kind, factors = "jplda", (("S", model.s), ("T", model.t))
    elif isinstance(model, PldaModel):
        kind, factors = "plda", (("B", model.b),)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    lines = [f"{MODEL_TAG} {FORMAT_VERSION} {kind} {model.dim}", f"MU {model.dim}", _fmt(model.mu)]
    for name, mat in factors:
        lines.append(f"{name} {mat.shape[0]} {mat.shape[1]}")
        if mat.shape[1]:
            lines.extend(_fmt(row) for row in mat)
    lines += [f"SIGMA {model.dim}", _fmt(model.sigma)]
    return "\n".join(lines) + "\n"


def parse_model(source):
    """Read a model written by :func:`serialize_model`."""
    text = source if isinstance(source, str) else source.read()
    lines = [(k, ln.split()) for k, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if not lines:
        raise MalformedHeader("empty model file", line=1)
    _, header = lines[0]
    if len(header) != 4 or header[0] != MODEL_TAG or header[1] != FORMAT_VERSION or header[2] not in ("plda", "jplda"):
        raise MalformedHeader(f"expected '{MODEL_TAG} {FORMAT_VERSION} plda|jplda <d>'", line=lines[0][0])
    kind = header[2]
    d = _int(header[3], lines[0][0])
    order = ["MU", "B", "SIGMA"] if kind == "plda" else ["MU", "S", "T", "SIGMA"]
    sections = {}
    pos = 1
    for name in order:
        if pos >= len(lines) or lines[pos][1][0] != name:
            raise MissingSection(f"section {name} not found where expected")
        lineno, head = lines[pos]
        pos += 1
        if name in ("MU", "SIGMA"):
            if len(head) != 2 or _int(head[1], lineno) != d:
                raise DimMismatch(f"{name} header must be '{name} {d}'", line=lineno)
            n_rows, n_cols, vector = 1, d, True
        else:
            if len(head) != 3 or _int(head[1], lineno) != d:
                raise DimMismatch(f"{name} header must be '{name} {d} <cols>'", line=lineno)
            n_rows, n_cols, vector = d, _int(head[2], lineno), False
            if n_cols == 0:
                sections[name] = np.zeros((d, 0))
                continue
        rows = []
        for _ in range(n_rows):
            if pos >= len(lines):
                raise MissingSection(f"section {name} is truncated")
            lineno, parts = lines[pos]
            if len(parts) != n_cols:
                raise DimMismatch(f"{name} row must have {n_cols} values", line=lineno)
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise NonFiniteValue(f"unparseable value in {name}", line=lineno) from None
            pos += 1
        arr = np.array(rows)
        sections[name] = arr[0] if vector else arr
    if kind == "plda":
        return PldaModel(mu=sections["MU"], b=sections["B"], sigma=sections["SIGMA"])
    return JointPldaModel(mu=sections["MU"], s=sections["S"], t=sections["T"], sigma=sections["SIGMA"])


def write_trials(trials, stream=None):
    out = io.StringIO() if stream is None else stream
    for t in trials:
        out.write(f"{','.join(str(k) for k in t.enroll)} {t.test} {t.kind}\n")
    return out.getvalue() if stream is None else None


def parse_trials(source, n_rows=None):
    """Read a trial file. With ``n_rows`` every index is range-checked."""
    trials = []
    for lineno, line in enumerate(_text(source), start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) != 3:
            raise RowArityError("expected '<enroll indices> <test index> <type>'", line=lineno)
        if parts[2] not in TRIAL_TYPES:
            raise FormatError(f"unknown trial type {parts[2]!r}", line=lineno)
        try:
            enroll = tuple(int(k) for k in parts[0].split(","))
            test = int(parts[1])
        except ValueError:
            raise FormatError("indices must be integers", line=lineno) from None
        indices = enroll + (test,)
        if min(indices) < 0 or (n_rows is not None and max(indices) >= n_rows):
            raise FormatError("feature index out of range", line=lineno)
        trials.append(Trial(enroll, test, parts[2]))
    return trials


def write_scores(trials, scores, stream=None):
    out = io.StringIO() if stream is None else stream
    for t, s in zip(trials, scores):
        out.write(f"{','.join(str(k) for k in t.enroll)} {t.test} {t.kind} {s:.17g}\n")
    return out.getvalue() if stream is None else None


def parse_scores(source):
    """Read a score file; returns ``(trials, scores)``."""
    trials, scores = [], []
    for lineno, line in enumerate(_text(source), start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 4:
            raise RowArityError("expected '<enroll> <test> <type> <score>'", line=lineno)
        trials.extend(parse_trials(" ".join(parts[:3])))
        try:
            scores.append(float(parts[3]))
        except ValueError:
            raise NonFiniteValue("unparseable score", line=lineno) from None
    return trials, np.array(scores)
