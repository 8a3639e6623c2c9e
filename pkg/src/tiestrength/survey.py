"""Survey tallies to per-parameter distribution coefficients p.

For a parameter in interaction category c, p = b_c / u_c / v_c: the share
of respondents naming c as the most telling interaction, split evenly
over the v_c parameters of that category. Arithmetic is exact (Fraction);
floats appear only at the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, LoadError


def compute_p(b, u, v) -> Fraction:
    if u == 0 or v == 0:
        raise ValueError(f"u and v must be positive (u={u}, v={v})")
    b, u, v = Fraction(b), Fraction(u), Fraction(v)
    if u < 0 or v < 1:
        raise ValueError(f"need u > 0 and v >= 1 (u={u}, v={v})")
    if not 0 <= b <= u:
        raise ValueError(f"need 0 <= b <= u (b={b}, u={u})")
    return b / (u * v)


@dataclass(frozen=True)
class Category:
    b: int
    u: int


@dataclass(frozen=True)
class ParameterSurvey:
    category: str | None = None
    v: int | None = None  # None: number of manifest parameters in the category
    fixed_p: float | None = None


@dataclass(frozen=True)
class SurveyTally:
    categories: dict[str, Category] = field(default_factory=dict)
    parameters: dict[str, ParameterSurvey] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> SurveyTally:
        try:
            cats = {name: Category(int(c["b"]), int(c["u"])) for name, c in data["categories"].items()}
            params = {}
            for name, entry in data["parameters"].items():
                params[name] = ParameterSurvey(
                    category=entry.get("category"),
                    v=None if entry.get("v") is None else int(entry["v"]),
                    fixed_p=None if entry.get("fixed_p") is None else float(entry["fixed_p"]),
                )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise LoadError(f"malformed survey tally: {exc!r}") from None
        return cls(cats, params)

    def to_dict(self) -> dict:
        params = {}
        for name, ps in self.parameters.items():
            entry = {}
            if ps.category is not None:
                entry["category"] = ps.category
            if ps.v is not None:
                entry["v"] = ps.v
            if ps.fixed_p is not None:
                entry["fixed_p"] = ps.fixed_p
            params[name] = entry
        return {
            "categories": {n: {"b": c.b, "u": c.u} for n, c in self.categories.items()},
            "parameters": params,
        }

    @classmethod
    def load(cls, path) -> SurveyTally:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise LoadError(f"cannot read survey tally {path}: {exc}") from None
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def resolved_v(tally: SurveyTally, manifest, name: str) -> int:
    ps = tally.parameters[name]
    if ps.v is not None:
        return ps.v
    return sum(
        1 for n in manifest.names if n in tally.parameters and tally.parameters[n].category == ps.category
    )


def survey_fractions(tally: SurveyTally, manifest) -> list[Fraction]:
    """Exact p per manifest parameter."""
    out = []
    for name in manifest.names:
        ps = tally.parameters.get(name)
        if ps is None or (ps.category is None and ps.fixed_p is None):
            raise ConfigError(f"survey tally does not cover parameter {name!r}")
        if ps.fixed_p is not None:
            if not 0.0 <= ps.fixed_p <= 1.0:
                raise ConfigError(f"{name}: fixed_p must lie in [0, 1], got {ps.fixed_p}")
            out.append(Fraction(ps.fixed_p))
            continue
        cat = tally.categories.get(ps.category)
        if cat is None:
            raise ConfigError(f"{name}: unknown survey category {ps.category!r}")
        out.append(compute_p(cat.b, cat.u, resolved_v(tally, manifest, name)))
    return out


def survey_weight_vector(tally: SurveyTally, manifest) -> tuple[float, ...]:
    return tuple(float(f) for f in survey_fractions(tally, manifest))
