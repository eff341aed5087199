"""Example networks and specs shipped with the package."""

from __future__ import annotations

from importlib import resources

from ..textio import parse_crn, parse_spec


def names() -> list[str]:
    return sorted(p.name for p in resources.files(__name__).iterdir()
                  if p.name.endswith((".crn", ".spec")))


def text(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")


def load(name: str):
    """Parsed fixture: a CRN/CRD/CRC for ``.crn`` files, a spec for ``.spec``."""
    body = text(name)
    return parse_spec(body) if name.endswith(".spec") else parse_crn(body)
