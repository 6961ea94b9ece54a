"""Command-line entry point: every operation as a subcommand over an INI
config, emitting CSV/SVG artifacts with fixed schemas.

Exit codes: 0 success, 2 check/certificate failed, 3 config error,
4 capacity error.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from . import __version__, kernels
from .annulus import (HAKConfigError, hak_verify, rigidity_scan,
                      rotation_estimate, rotation_family, rotation_number)
from .cantor import mixing_witness_symbolic, random_point
from .chains import (ChainError, PatternError, StretchPreconditionError,
                     essential_seven_chain, horseshoe_extract, kfold,
                     refine_chain, render_chains)
from .config import (ConfigError, RunConfig, build_cantor, build_interval_chain,
                     build_map, build_plmap, build_stages, load_config)
from .suspension import (CapacityError, SuspensionSystem, dense_orbit_check,
                         normalize, orbit, product_formula_report,
                         weak_mixing_witness)

EXIT_OK = 0
EXIT_CHECK = 2
EXIT_CONFIG = 3
EXIT_CAPACITY = 4

CONFIG_FORMAT = 1


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _out_path(args, cfg: RunConfig, default: str) -> str:
    if getattr(args, "out", None):
        return args.out
    return cfg.raw("experiment", "out", default)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_rotation(args) -> int:
    cfg = load_config(args.config, args.override)
    m = build_map(cfg)
    n = cfg.get_int("experiment", "n", 1024)
    t = cfg.get_float("orbit", "t", 0.5)
    r = cfg.get_float("orbit", "r", 0.0)
    rows = rotation_estimate(m, t, r, n)
    out = _out_path(args, cfg, "rotation.csv")
    _write_csv(out, ["n", "estimate"], [[k, est] for k, est in rows])
    print(f"rotation: estimate {rows[-1][1]:.9g} at n={n} -> {out}")
    return EXIT_OK


def cmd_rigidity(args) -> int:
    cfg = load_config(args.config, args.override)
    m = build_map(cfg)
    grid = cfg.get_int("experiment", "grid", 24)
    horizon = cfg.get_int("experiment", "horizon", required=True)
    eps = cfg.get_float("experiment", "eps", required=True)
    band = cfg.get_floats("experiment", "band", [0.0, 1.0])
    rows = rigidity_scan(m, grid, horizon, eps, (band[0], band[1]))
    out = _out_path(args, cfg, "rigidity.csv")
    _write_csv(out, ["n", "sup_displacement"], [[n, d] for n, d in rows])
    print(f"rigidity: {len(rows)} qualifying times <= {horizon} at eps={eps:.9g} -> {out}")
    return EXIT_OK


def cmd_hak_verify(args) -> int:
    cfg = load_config(args.config, args.override)
    stages = build_stages(cfg)
    grid = cfg.get_int("hak", "grid", 24)
    tail = cfg.get_float("hak", "tail", 0.0)
    horizon = cfg.get_int("hak", "horizon", None)
    report = hak_verify(stages, grid=grid, horizon=horizon, tail=tail)
    out = _out_path(args, cfg, "hak_verify.csv")
    _write_csv(out, ["condition", "stage", "value", "bound", "margin", "passed"],
               [[c.condition, c.stage, c.value, c.bound, c.margin, c.passed]
                for c in report.checks])
    if report.passed:
        worst = min(c.margin for c in report.checks)
        print(f"hak-verify: all conditions (1)-(8) pass; smallest margin {worst:.9g} -> {out}")
        return EXIT_OK
    failing = ",".join(report.failing_conditions())
    print(f"hak-verify: FAILED condition(s) ({failing}) -> {out}")
    return EXIT_CHECK


def cmd_suspend_entropy(args) -> int:
    cfg = load_config(args.config, args.override)
    m = build_map(cfg)
    h = build_cantor(cfg)
    window = cfg.get_int("cantor", "window", 32)
    seed = cfg.get_int("experiment", "seed", required=True)
    eps_list = cfg.get_floats("experiment", "eps", required=True)
    n_list = cfg.get_ints("experiment", "n", required=True)
    budget = cfg.get_int("experiment", "budget", 20000)
    sys_ = SuspensionSystem(m, h, window)
    alpha = rotation_number(m)
    rows = product_formula_report(sys_, alpha, eps_list, n_list, budget, seed)
    out = _out_path(args, cfg, "suspend_entropy.csv")
    _write_csv(out, ["eps", "n", "budget", "lower", "upper", "target", "alpha", "h_entropy"],
               [[r.eps, r.n, r.budget, r.lower, r.upper, r.target, r.alpha, r.h_entropy]
                for r in rows])
    last = rows[-1]
    print(f"suspend-entropy: bracket [{last.lower:.9g}, {last.upper:.9g}] "
          f"target {last.target:.9g} -> {out}")
    return EXIT_OK


def cmd_suspend_orbit(args) -> int:
    cfg = load_config(args.config, args.override)
    m = build_map(cfg)
    h = build_cantor(cfg)
    window = cfg.get_int("cantor", "window", 32)
    seed = cfg.get_int("orbit", "seed", required=True)
    t = cfg.get_float("orbit", "t", 0.5)
    r = cfg.get_float("orbit", "r", 0.0)
    n = cfg.get_int("orbit", "n", 32)
    sys_ = SuspensionSystem(m, h, window)
    c = random_point(h, seed, window)
    p0 = sys_.point(t, r, c)
    pts = orbit(sys_, p0, n)
    out = _out_path(args, cfg, "suspend_orbit.csv")
    _write_csv(out, ["k", "t", "r", "w", "component"],
               [[k, p.t, p.r, p.winding, sys_.component_index(p.seed)]
                for k, p in enumerate(pts)])
    print(f"suspend-orbit: {n} steps, final winding {pts[-1].winding} -> {out}")
    return EXIT_OK


def cmd_mixing_witness(args) -> int:
    cfg = load_config(args.config, args.override)
    mode = (cfg.raw("witness", "mode", "suspension") or "").strip().lower()
    horizon = cfg.get_int("witness", "horizon", 64)
    out = _out_path(args, cfg, "mixing_witness.csv")
    if mode == "symbolic":
        h = build_cantor(cfg)
        u = tuple(cfg.get_ints("witness", "u", required=True))
        v = tuple(cfg.get_ints("witness", "v", required=True))
        found = mixing_witness_symbolic(h, u, v, horizon)
    elif mode == "suspension":
        m = build_map(cfg)
        h = build_cantor(cfg)
        window = cfg.get_int("cantor", "window", 32)
        sys_ = SuspensionSystem(m, h, window)
        seed = cfg.get_int("experiment", "seed", required=True)

        def ball(key):
            spec = cfg.get_floats("witness", key, required=True)
            if len(spec) != 3:
                raise ConfigError(f"witness.{key} must be 't,r,seed'")
            c = random_point(h, int(spec[2]), window)
            radius = cfg.get_float("witness", f"{key}_radius", required=True)
            return (normalize(sys_, spec[0], spec[1], c), radius)

        found = weak_mixing_witness(sys_, ball("u"), ball("v"), horizon,
                                    cloud_size=cfg.get_int("witness", "cloud", 64),
                                    seed=seed)
    else:
        raise ConfigError(f"witness.mode must be symbolic or suspension, got {mode!r}")
    _write_csv(out, ["mode", "horizon", "found", "l"],
               [[mode, horizon, found is not None, "" if found is None else found]])
    verdict = f"l={found}" if found is not None else "none within horizon"
    print(f"mixing-witness[{mode}]: {verdict} -> {out}")
    return EXIT_OK


def cmd_dense_orbit(args) -> int:
    cfg = load_config(args.config, args.override)
    m = build_map(cfg)
    h = build_cantor(cfg)
    window = cfg.get_int("cantor", "window", 32)
    sys_ = SuspensionSystem(m, h, window)
    seed = cfg.get_int("dense", "seed", required=True)
    eps = cfg.get_float("dense", "eps", required=True)
    k_max = cfg.get_int("dense", "k_max", 4)
    s_max = cfg.get_int("dense", "s_max", 4)
    p_max = cfg.get_int("dense", "p_max", 256)
    t = cfg.get_float("orbit", "t", 0.5)
    r = cfg.get_float("orbit", "r", 0.0)
    c = random_point(h, seed, window)
    hit = dense_orbit_check(sys_, c, (t, r), eps, k_max, s_max, p_max)
    out = _out_path(args, cfg, "dense_orbit.csv")
    if hit is None:
        _write_csv(out, ["found", "k", "s", "p"], [[False, "", "", ""]])
        print(f"dense-orbit: no witness within bounds -> {out}")
    else:
        _write_csv(out, ["found", "k", "s", "p"], [[True, hit[0], hit[1], hit[2]]])
        print(f"dense-orbit: witness k={hit[0]} s={hit[1]} p={hit[2]} -> {out}")
    return EXIT_OK


def cmd_rotation_family(args) -> int:
    cfg = load_config(args.config, args.override)
    raw_bits = (cfg.raw("family", "bits", required=True) or "").strip()
    if any(ch not in "01" for ch in raw_bits) or not raw_bits:
        raise ConfigError(f"family.bits must be a nonempty 0/1 word, got {raw_bits!r}")
    bits = tuple(int(ch) for ch in raw_bits)
    eps = cfg.get_float("family", "eps", required=True)
    alpha, schedule = rotation_family(bits, eps)
    out = _out_path(args, cfg, "rotation_family.csv")
    _write_csv(out, ["n", "bit", "b_n", "term"],
               [[i + 1, b, s, s if b else s / 3.0]
                for i, (b, s) in enumerate(zip(bits, schedule))])
    print(f"rotation-family: alpha = {alpha:.12g} for bits {raw_bits} -> {out}")
    return EXIT_OK


def cmd_pattern(args) -> int:
    pat = kfold(args.kfold)
    text = ",".join(str(v) for v in pat.values)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def cmd_horseshoe(args) -> int:
    cfg = load_config(args.map, args.override)
    g = build_plmap(cfg)
    chain = build_interval_chain(cfg)
    k = args.k if args.k is not None else cfg.get_int("horseshoe", "k", required=True)
    depth = args.depth if args.depth is not None else cfg.get_int("horseshoe", "depth", 5)
    m_bound = cfg.get_int("horseshoe", "mbound", 8)
    cert = horseshoe_extract(g, chain, k, depth, m_bound)
    out = args.out or cfg.raw("horseshoe", "out", "horseshoe.csv")
    rows = [["-".join(map(str, word)), float(lo), float(hi)]
            for word, (lo, hi) in sorted(cert.intervals.items())]
    _write_csv(out, ["word", "lo", "hi"], rows)
    print(cert.summary() + f" -> {out}")
    return EXIT_OK if cert.passed else EXIT_CHECK


def cmd_render(args) -> int:
    cfg = load_config(args.levels, args.override)
    levels = []
    level_sections = sorted(s for s in cfg.parser.sections() if s.startswith("level"))
    if level_sections:
        from .chains import ChainCover, Rect, FR
        for name in level_sections:
            raw = cfg.raw(name, "links", required=True)
            rects = []
            for chunk in raw.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                parts = chunk.split(",")
                if len(parts) != 4:
                    raise ConfigError(f"{name}.links: need 'tlo,thi,alo,ahi' got {chunk!r}")
                tlo, thi, alo, ahi = (FR(x) for x in parts)
                rects.append(Rect((tlo, thi), (alo, ahi)))
            essential = (cfg.raw(name, "essential", "false") or "").lower() == "true"
            levels.append(ChainCover.build(rects, essential))
    elif cfg.parser.has_section("render"):
        base = (cfg.raw("render", "base", "essential7") or "").strip()
        if base != "essential7":
            raise ConfigError(f"render.base: only 'essential7' is built in, got {base!r}")
        n_levels = cfg.get_int("render", "levels", 1)
        pattern_spec = (cfg.raw("render", "pattern", "kfold:3") or "").strip()
        name, _, arg = pattern_spec.partition(":")
        if name != "kfold":
            raise ConfigError(f"render.pattern: only kfold:K supported, got {pattern_spec!r}")
        pat = kfold(int(arg))
        chain = essential_seven_chain()
        levels = [chain]
        for _ in range(n_levels - 1):
            levels.append(refine_chain(levels[-1], pat))
    else:
        raise ConfigError("levels file needs [level *] sections or a [render] block")
    out = args.out or "chains.svg"
    svg = render_chains(levels)
    Path(out).write_text(svg, encoding="utf-8")
    counts = "/".join(str(len(lv.links)) for lv in levels)
    print(f"render: {len(levels)} level(s) with {counts or '0'} links -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def list_fixtures() -> list[tuple[str, str]]:
    out = []
    for entry in sorted(resources.files("pseudosusp.fixtures").iterdir()):
        if entry.name.endswith(".ini"):
            first = entry.read_text(encoding="utf-8").splitlines()[0]
            desc = first.lstrip("; #").strip() if first.startswith((";", "#")) else ""
            out.append((entry.name, desc))
    return out


def fixture_path(name: str) -> str:
    return str(resources.files("pseudosusp.fixtures") / name)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pseudosusp",
        description="suspension-quotient dynamics laboratory")
    ap.add_argument("--version", action="store_true", help="print version and exit")
    ap.add_argument("--list-fixtures", action="store_true",
                    help="enumerate shipped fixture configs and exit")
    sub = ap.add_subparsers(dest="command")

    def common(p, config_required=True):
        p.add_argument("-c", "--config", required=config_required, help="INI config path")
        p.add_argument("--out", help="output artifact path")
        p.add_argument("--override", action="append", default=[],
                       metavar="SEC.KEY=VAL", help="override a config value")

    common(sub.add_parser("rotation", help="rotation-number estimate sequence"))
    common(sub.add_parser("rigidity", help="near-identity return times of a map"))
    common(sub.add_parser("hak-verify", help="verify the staged approximation conditions"))
    common(sub.add_parser("suspend-entropy", help="entropy bracket on the suspension"))
    common(sub.add_parser("suspend-orbit", help="suspension orbit with winding bookkeeping"))
    common(sub.add_parser("mixing-witness", help="weak-mixing witness search"))
    common(sub.add_parser("dense-orbit", help="dense-orbit condition search"))
    common(sub.add_parser("rotation-family", help="injective rotation-number family"))

    p_pat = sub.add_parser("pattern", help="print a k-fold pattern")
    p_pat.add_argument("--kfold", type=int, required=True, metavar="K")
    p_pat.add_argument("--out")

    p_h = sub.add_parser("horseshoe", help="itinerary certificate for a PL map")
    p_h.add_argument("--map", required=True, help="INI with [plmap] and [chain]")
    p_h.add_argument("--k", type=int)
    p_h.add_argument("--depth", type=int)
    p_h.add_argument("--out")
    p_h.add_argument("--override", action="append", default=[])

    p_r = sub.add_parser("render", help="render nested chains to SVG")
    p_r.add_argument("--levels", required=True, help="INI with [level *] or [render]")
    p_r.add_argument("--out")
    p_r.add_argument("--override", action="append", default=[])
    return ap


HANDLERS = {
    "rotation": cmd_rotation,
    "rigidity": cmd_rigidity,
    "hak-verify": cmd_hak_verify,
    "suspend-entropy": cmd_suspend_entropy,
    "suspend-orbit": cmd_suspend_orbit,
    "mixing-witness": cmd_mixing_witness,
    "dense-orbit": cmd_dense_orbit,
    "rotation-family": cmd_rotation_family,
    "pattern": cmd_pattern,
    "horseshoe": cmd_horseshoe,
    "render": cmd_render,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.version:
        print(f"pseudosusp {__version__} (config format {CONFIG_FORMAT}, "
              f"kernel backend {kernels.backend_name()})")
        return EXIT_OK
    if args.list_fixtures:
        for name, desc in list_fixtures():
            print(f"{name}: {desc}")
        return EXIT_OK
    if not args.command:
        ap.print_help()
        return EXIT_CONFIG
    try:
        return HANDLERS[args.command](args)
    except StretchPreconditionError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, HAKConfigError, ChainError, PatternError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
