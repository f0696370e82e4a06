"""Bundled example programs.

Worked examples (benefits, loyalty, credit), a program with inputs that
appear in the code but never affect the result, boolean OR, and a few small
programs for the disclosure-ordering examples.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import List

from ..dsl import Program, parse


def names() -> List[str]:
    return sorted(p.name[:-3] for p in resources.files(__name__).iterdir() if p.name.endswith(".dm"))


def path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(f"{name}.dm")))


def source(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def load(name: str) -> Program:
    return parse(source(name))
