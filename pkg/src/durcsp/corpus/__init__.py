"""Bundled example specifications."""

from __future__ import annotations

import json
from importlib import resources
from string import Template

from ..syntax import ParseError, SpecError, parse_spec


class CorpusError(ValueError):
    pass


def _dir():
    return resources.files(__name__)


def sidecar(name: str) -> dict:
    """Parameters from ``<name>.json``, or ``{}`` when there is none."""
    f = _dir() / f"{name}.json"
    if not f.is_file():
        return {}
    try:
        return json.loads(f.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{name}.json: {exc}") from None


def names(directory=None) -> list:
    root = directory or _dir()
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".dcsp"))


def source(name: str, params: dict | None = None, directory=None) -> str:
    root = directory or _dir()
    f = root / f"{name}.dcsp"
    if not f.is_file():
        raise CorpusError(f"no corpus entry {name!r}")
    text = f.read_text(encoding="utf-8")
    if "${" in text:
        values = dict(sidecar(name) if directory is None else {})
        values.update(params or {})
        try:
            text = Template(text).substitute({k: str(v) for k, v in values.items()})
        except KeyError as exc:
            raise CorpusError(f"{name}: missing parameter {exc}") from None
    return text


def load(name: str, params: dict | None = None, directory=None):
    try:
        return parse_spec(source(name, params, directory))
    except (ParseError, SpecError) as exc:
        raise CorpusError(f"{name}: {exc}") from None


def load_corpus(directory=None) -> list:
    """``(name, Spec)`` for every ``.dcsp`` file, in name order."""
    found = names(directory)
    if not found:
        raise CorpusError(f"corpus directory {directory or _dir()} holds no .dcsp files")
    return [(n, load(n, directory=directory)) for n in found]
