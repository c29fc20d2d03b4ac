"""Reader and writer for ``.tir`` tire property files.

The format is line oriented::

    [SECTION_NAME]
    $ comment, also '!'
    KEY            = 1.25      $ optional trailing comment
    STRING_KEY     = 'text'

Numeric values are parsed to ``float``; quoted values are kept as strings
(model metadata such as ``PROPERTY_FILE_FORMAT``).  Keys are unique within the
whole file in practice; a duplicate inside one section overwrites the earlier
value and is recorded as a warning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

__all__ = ["TirParams", "TirFileError", "parse_tir", "serialize_tir", "SCALING_KEYS"]

MANDATORY_KEYS = ("FNOMIN", "UNLOADED_RADIUS")

# Magic Formula scaling factors default to 1, every other absent coefficient to 0.
SCALING_KEYS = frozenset(
    [
        "LFZO", "LCX", "LMUX", "LEX", "LKX", "LHX", "LVX", "LGAX",
        "LCY", "LMUY", "LEY", "LKY", "LHY", "LVY", "LGAY", "LKYG",
        "LTR", "LRES", "LGAZ", "LXAL", "LYKA", "LVYKA", "LS",
        "LSGKP", "LSGAL", "LGYR", "LMX", "LVMX", "LMY", "LIP", "LCZ",
    ]
)

_SECTION_RE = re.compile(r"^\[([^\]]+)\]\s*$")


class TirFileError(ValueError):
    """Raised for malformed or incomplete tire property files."""


@dataclass
class TirParams:
    """Parsed contents of a ``.tir`` file.

    ``sections`` preserves the file layout for serialization; ``coefficients``
    is the flat numeric view used by the evaluator.  ``warnings`` records
    duplicate keys seen while parsing.
    """

    sections: dict[str, dict[str, float | str]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def coefficients(self) -> dict[str, float]:
        flat: dict[str, float] = {}
        for body in self.sections.values():
            for key, value in body.items():
                if isinstance(value, float):
                    flat[key] = value
        return flat

    def get(self, key: str, defaulted: set[str] | None = None) -> float:
        """Resolve a numeric coefficient with the absent-key policy.

        Scaling factors fall back to 1, shape/shift coefficients to 0.  Keys
        resolved through the fallback are reported via ``defaulted``.
        """
        for body in self.sections.values():
            if key in body and isinstance(body[key], float):
                return body[key]
        if defaulted is not None:
            defaulted.add(key)
        return 1.0 if key in SCALING_KEYS else 0.0

    def __getitem__(self, key: str) -> float:
        return self.get(key)

    def set(self, key: str, value: float, section: str = "MODEL") -> None:
        for body in self.sections.values():
            if key in body:
                body[key] = float(value)
                return
        self.sections.setdefault(section, {})[key] = float(value)

    def validate(self) -> None:
        coeff = self.coefficients
        for key in ("FNOMIN", "UNLOADED_RADIUS", "VERTICAL_STIFFNESS"):
            if coeff.get(key, 0.0) <= 0.0:
                raise TirFileError(f"{key} must be present and positive, got {coeff.get(key)}")


def _strip_comment(line: str) -> str:
    # Comments start at '$' or '!' unless inside a quoted value.
    out = []
    quote = None
    for ch in line:
        if quote:
            out.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in "'\"":
            quote = ch
            out.append(ch)
            continue
        if ch in "$!":
            break
        out.append(ch)
    return "".join(out).strip()


def parse_tir(text: str) -> TirParams:
    """Parse ``.tir`` text into a :class:`TirParams`.

    Raises :class:`TirFileError` on a section-body line without ``=``, on a
    non-numeric unquoted value, or when a mandatory key (FNOMIN,
    UNLOADED_RADIUS) is missing.
    """
    params = TirParams()
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped[0] in "$!":
            continue
        m = _SECTION_RE.match(stripped)
        if m:
            section = m.group(1).strip().upper()
            params.sections.setdefault(section, {})
            continue
        content = _strip_comment(stripped)
        if not content:
            continue
        if section is None:
            # Header junk before the first section is tolerated if it is not
            # shaped like an assignment; assignments outside a section are not.
            if "=" in content:
                raise TirFileError(f"line {lineno}: assignment outside any [SECTION]")
            continue
        if "=" not in content:
            raise TirFileError(f"line {lineno}: expected 'KEY = VALUE' inside [{section}]")
        key, _, value = content.partition("=")
        key = key.strip().upper()
        value = value.strip()
        if not key:
            raise TirFileError(f"line {lineno}: empty key")
        if value and value[0] in "'\"":
            parsed: float | str = value.strip("'\"")
        else:
            try:
                parsed = float(value)
            except ValueError:
                raise TirFileError(
                    f"line {lineno}: non-numeric value {value!r} for key {key}"
                ) from None
        if key in params.sections[section]:
            params.warnings.append(
                f"duplicate key {key} in [{section}]; keeping the later value"
            )
        params.sections[section][key] = parsed

    coeff = params.coefficients
    missing = [k for k in MANDATORY_KEYS if k not in coeff]
    if missing:
        raise TirFileError(f"missing mandatory keys: {', '.join(missing)}")
    return params


def load_tir(path) -> TirParams:
    with open(path, "r", encoding="latin-1") as fh:
        return parse_tir(fh.read())


def serialize_tir(params: TirParams) -> str:
    """Render ``params`` back to ``.tir`` text; parse(serialize(p)) == p."""
    lines = []
    for section, body in params.sections.items():
        lines.append(f"[{section}]")
        for key, value in body.items():
            if isinstance(value, str):
                lines.append(f"{key:<24} = '{value}'")
            else:
                lines.append(f"{key:<24} = {value!r}")
        lines.append("")
    return "\n".join(lines)
