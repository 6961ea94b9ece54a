"""INI-style run configuration: sections [map], [cantor], [stage *],
[experiment] and per-subcommand blocks.  Every parse error names the failing
section.key."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .annulus import (HAKStage, LiftedAnnulusMap, Profile, RadialReparam,
                      RigidRotation, Twist, cover_lift)
from .cantor import (CantorSystem, FullShift, Odometer, SFT, Substitution,
                     validate_system)
from .chains import FR, IntervalChain, PLMap


class ConfigError(ValueError):
    """Bad or missing configuration value; message names section.key."""


@dataclass
class RunConfig:
    parser: configparser.ConfigParser
    path: str = "<none>"
    overrides: dict = field(default_factory=dict)

    def has(self, section: str, key: str) -> bool:
        if (section, key) in self.overrides:
            return True
        return self.parser.has_option(section, key)

    def raw(self, section: str, key: str, default=None, required: bool = False):
        if (section, key) in self.overrides:
            return self.overrides[(section, key)]
        if self.parser.has_option(section, key):
            return self.parser.get(section, key)
        if required:
            raise ConfigError(f"missing required key {section}.{key}")
        return default

    def _typed(self, caster, kind, section, key, default, required):
        raw = self.raw(section, key, None, required)
        if raw is None:
            return default
        try:
            return caster(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{section}.{key} is not a valid {kind}: {raw!r}") from exc

    def get_int(self, section, key, default=None, required=False) -> Optional[int]:
        return self._typed(int, "integer", section, key, default, required)

    def get_float(self, section, key, default=None, required=False) -> Optional[float]:
        return self._typed(float, "number", section, key, default, required)

    def get_fraction(self, section, key, default=None, required=False) -> Optional[Fraction]:
        return self._typed(Fraction, "fraction", section, key, default, required)

    def get_floats(self, section, key, default=None, required=False) -> Optional[list[float]]:
        def cast(raw):
            return [float(x) for x in raw.replace(";", ",").split(",") if x.strip()]
        return self._typed(cast, "number list", section, key, default, required)

    def get_ints(self, section, key, default=None, required=False) -> Optional[list[int]]:
        def cast(raw):
            return [int(x) for x in raw.replace(";", ",").split(",") if x.strip()]
        return self._typed(cast, "integer list", section, key, default, required)


def load_config(path: Optional[str], overrides: Optional[list[str]] = None) -> RunConfig:
    parser = configparser.ConfigParser()
    if path is not None:
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
    cfg = RunConfig(parser, path or "<none>")
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        cfg.overrides[(section.strip(), key.strip())] = value.strip()
    return cfg


# ---------------------------------------------------------------------------
# section builders
# ---------------------------------------------------------------------------

def _parse_breakpoints(raw: str, key: str) -> tuple[tuple[float, float], ...]:
    pts = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ConfigError(f"{key}: breakpoint {chunk!r} is not 'x,y'")
        try:
            pts.append((float(Fraction(parts[0])), float(Fraction(parts[1]))))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{key}: bad breakpoint {chunk!r}") from exc
    return tuple(pts)


def build_map(cfg: RunConfig) -> LiftedAnnulusMap:
    raw = cfg.raw("map", "map", required=True)
    pipeline = []
    cover = None
    for stage in raw.split("|"):
        stage = stage.strip()
        if not stage:
            continue
        if ":" not in stage:
            raise ConfigError(f"map.map: primitive {stage!r} needs 'name:args'")
        name, args = stage.split(":", 1)
        name = name.strip().lower()
        if name == "rotation":
            try:
                pipeline.append(RigidRotation(float(Fraction(args.strip()))))
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"map.map: bad rotation {args!r}") from exc
        elif name == "twist":
            pipeline.append(Twist(Profile(_parse_breakpoints(args, "map.map twist"))))
        elif name == "reparam":
            pipeline.append(RadialReparam(Profile(_parse_breakpoints(args, "map.map reparam"))))
        elif name == "cover":
            qp = args.split(",")
            if len(qp) != 2:
                raise ConfigError("map.map: cover needs 'q,p'")
            cover = (int(qp[0]), int(qp[1]))
        else:
            raise ConfigError(f"map.map: unknown primitive {name!r}")
    m = LiftedAnnulusMap(tuple(pipeline), label=raw)
    if cover is not None:
        m = cover_lift(m, cover[0], cover[1])
    return m


def build_cantor(cfg: RunConfig) -> CantorSystem:
    kind = (cfg.raw("cantor", "kind", required=True) or "").strip().lower()
    if kind == "fullshift":
        sys_ = FullShift(cfg.get_int("cantor", "k", required=True))
    elif kind == "sft":
        k = cfg.get_int("cantor", "k", required=True)
        raw = cfg.raw("cantor", "adjacency", required=True)
        rows = []
        for row in raw.split(";"):
            rows.append(tuple(int(x) for x in row.split(",")))
        sys_ = SFT(k, tuple(rows))
    elif kind == "substitution":
        raw = cfg.raw("cantor", "rules", required=True)
        rules: dict[int, tuple[int, ...]] = {}
        for part in raw.split(";"):
            part = part.strip()
            if not part:
                continue
            sym, word = part.split(":")
            rules[int(sym)] = tuple(int(ch) for ch in word.strip())
        sys_ = Substitution(tuple(rules[i] for i in sorted(rules)))
    elif kind == "odometer":
        bases = tuple(cfg.get_ints("cantor", "bases", required=True))
        sys_ = Odometer(bases)
    else:
        raise ConfigError(f"cantor.kind: unknown kind {kind!r}")
    try:
        validate_system(sys_)
    except ValueError as exc:
        raise ConfigError(f"cantor section invalid: {exc}") from exc
    return sys_


def build_stages(cfg: RunConfig) -> list[HAKStage]:
    names = sorted(s for s in cfg.parser.sections() if s.startswith("stage"))
    if not names:
        raise ConfigError("no [stage *] sections found")
    stages = []
    for i, name in enumerate(names, start=1):
        band = cfg.get_floats(name, "band", required=True)
        if len(band) != 2:
            raise ConfigError(f"{name}.band must be 'lo,hi'")
        support = None
        if cfg.has(name, "support"):
            sup = cfg.get_floats(name, "support")
            if len(sup) != 2:
                raise ConfigError(f"{name}.support must be 'lo,hi'")
            support = (sup[0], sup[1])
        stages.append(HAKStage(
            n=i,
            eps=cfg.get_float(name, "eps", required=True),
            band=(band[0], band[1]),
            rot=cfg.get_fraction(name, "rot", required=True),
            alpha=cfg.get_fraction(name, "alpha", required=True),
            q=cfg.get_int(name, "q", required=True),
            support=support,
        ))
    return stages


def build_plmap(cfg: RunConfig, section: str = "plmap") -> PLMap:
    raw = cfg.raw(section, "breakpoints", required=True)
    pts = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, y = chunk.split(",")
        pts.append((FR(x), FR(y)))
    try:
        return PLMap(tuple(pts))
    except ValueError as exc:
        raise ConfigError(f"{section}.breakpoints: {exc}") from exc


def build_interval_chain(cfg: RunConfig, section: str = "chain") -> IntervalChain:
    raw = cfg.raw(section, "links", required=True)
    links = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        lo, hi = chunk.split(",")
        links.append((FR(lo), FR(hi)))
    return IntervalChain(tuple(links))
