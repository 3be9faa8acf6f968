"""Command-line interface.

Subcommands
-----------
eval-lattice       lattice kernel ``k(z, n)``
eval-continuum     truncated continuum kernel ``k_gamma(z, x)``
branch-lattice     branching decomposition at a lattice threshold
branch-continuum   branching decomposition at the continuum threshold
verify             verification suites (JSON report)

Spectral samples are given either as ``--w`` (offset from the threshold),
``--z`` (absolute) or a rectangular grid ``--rect re0,re1,nre,im0,im1,nim``
in ``w``. The branch modes also accept ``--ray`` (degrees) with
``--ladder base,ratio,steps`` for a ray-limit run.

CSV output always carries the header in :data:`CSV_HEADER`; fields that do
not apply to a mode are left empty. Exit status: 0 on success, 1 on a failed
check or numerical error, 2 on a configuration error.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import continuum as cm
from . import lattice as lt
from . import verify as vf
from ._formatting import format_complex, format_real, parse_complex
from .exceptions import ConfigError, ResolventError
from .quadrature import ExtrapolationLadder, TorusGrid
from .specfun import SeriesControl

__all__ = ["CSV_HEADER", "RunConfig", "build_parser", "load_config", "run", "main"]

CSV_HEADER = (
    "mode", "d", "p", "q", "n_or_x", "re_z", "im_z", "re_value", "im_value",
    "re_branching", "im_branching", "re_remainder", "im_remainder", "error_estimate", "nodes",
)

MODES = ("eval-lattice", "eval-continuum", "branch-lattice", "branch-continuum", "verify")


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; mirrors the flag set and config-file keys."""

    mode: str
    d: int = None
    p: int = None
    q: int = 0
    points: tuple = ()
    samples: tuple = ()
    rays: tuple = ()
    ladder: ExtrapolationLadder = None
    grid: int = None
    method: str = None
    gamma: float = 1.0
    perturbation: float = 1.0
    suite: str = "all"
    output_format: str = None
    output_path: str = None
    record_timings: bool = False
    series: SeriesControl = field(default_factory=SeriesControl)

    @property
    def is_lattice(self):
        return self.mode.endswith("lattice")

    @property
    def ray_mode(self):
        return bool(self.rays)

    @property
    def dimension(self):
        return self.d if self.is_lattice else self.p + self.q

    @property
    def threshold(self):
        return 4.0 * self.q if self.is_lattice else 0.0


# ---------------------------------------------------------------------------
# parsing


def _split_list(text):
    if isinstance(text, (list, tuple)):
        return list(text)
    return [s for s in str(text).replace(";", ",").split(",") if s.strip()]


def _parse_int_vector(text):
    try:
        return tuple(int(v) for v in _split_list(text))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot parse lattice point {text!r}") from exc


def _parse_complex_vector(text):
    try:
        return tuple(parse_complex(v) for v in _split_list(text))
    except ValueError as exc:
        raise ConfigError(f"cannot parse space point {text!r}") from exc


def _parse_complex(text, name):
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {name} value {text!r}") from exc


def _parse_ladder(text):
    parts = _split_list(text)
    if len(parts) != 3:
        raise ConfigError(f"ladder must be 'base,ratio,steps', got {text!r}")
    try:
        return ExtrapolationLadder(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"invalid ladder {text!r}: {exc}") from exc


def _parse_rect(text):
    parts = _split_list(text)
    if len(parts) != 6:
        raise ConfigError(f"rect must be 're0,re1,nre,im0,im1,nim', got {text!r}")
    try:
        re0, re1, nre, im0, im1, nim = (float(parts[0]), float(parts[1]), int(parts[2]),
                                       float(parts[3]), float(parts[4]), int(parts[5]))
    except ValueError as exc:
        raise ConfigError(f"invalid rect {text!r}") from exc
    if nre < 1 or nim < 1:
        raise ConfigError("rect node counts must be positive")
    # row-major: imaginary part outer, real part inner
    return [complex(a, b) for b in np.linspace(im0, im1, nim) for a in np.linspace(re0, re1, nre)]


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="resolvent-thresholds",
        description="Resolvent kernels and threshold branching for lattice and continuum operators.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with run settings; flags override its values")
        p.add_argument("--format", dest="format", choices=("csv", "json"), default=None)
        p.add_argument("--output", default=None, help="output file (default: stdout)")
        p.add_argument("--max-degree", type=int, default=None, help="initial series truncation degree")
        p.add_argument("--abs-tol", type=float, default=None, help="series tail tolerance")

    def spectral(p, point_flag, point_help):
        p.add_argument(point_flag, dest="points", action="append", default=None, help=point_help)
        p.add_argument("--w", action="append", default=None, help="offset from the threshold, a+bi")
        p.add_argument("--z", action="append", default=None, help="absolute spectral parameter, a+bi")
        p.add_argument("--rect", default=None, help="rectangular w grid re0,re1,nre,im0,im1,nim")

    def lattice_args(p):
        p.add_argument("--d", type=int, default=None)
        p.add_argument("--q", type=int, default=None)
        p.add_argument("--grid", type=int, default=None, help="torus nodes per dimension (default adaptive)")
        p.add_argument("--method", choices=("trapezoid", "bessel", "closed"), default=None)

    def continuum_args(p):
        p.add_argument("--p", type=int, default=None)
        p.add_argument("--q", type=int, default=None)
        p.add_argument("--gamma", type=float, default=None, help="frequency cutoff (default 1)")
        p.add_argument("--method", choices=("hyperbolic", "triangle"), default=None)

    def ray_args(p):
        p.add_argument("--ray", action="append", default=None, help="ray angle(s) in degrees, in (0, 180)")
        p.add_argument("--ladder", default=None, help="base,ratio,steps for the radii |w|")
        p.add_argument("--perturbation", type=float, default=None, help="factor on the branching term")

    p = sub.add_parser("eval-lattice", help="evaluate the lattice kernel")
    lattice_args(p)
    spectral(p, "--n", "lattice point, e.g. 0,0 (repeatable)")
    common(p)
    p = sub.add_parser("eval-continuum", help="evaluate the truncated continuum kernel")
    continuum_args(p)
    spectral(p, "--x", "space point, e.g. 0.5,0.25 (repeatable)")
    common(p)
    p = sub.add_parser("branch-lattice", help="branching decomposition at a lattice threshold")
    lattice_args(p)
    spectral(p, "--n", "lattice point, e.g. 0,0 (repeatable)")
    ray_args(p)
    common(p)
    p = sub.add_parser("branch-continuum", help="branching decomposition at the continuum threshold")
    continuum_args(p)
    spectral(p, "--x", "space point, e.g. 0.5,0.25 (repeatable)")
    ray_args(p)
    common(p)
    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", default=None, choices=vf.SUITE_NAMES)
    p.add_argument("--record-timings", action="store_true", default=None)
    common(p)
    return parser


def load_config(path):
    """Read a JSON config file into a flat dict of settings."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


_FILE_KEYS = {
    "mode", "d", "p", "q", "n", "x", "points", "w", "z", "rect", "grid", "method", "gamma",
    "ray", "ladder", "perturbation", "suite", "format", "output", "record_timings",
    "max_degree", "abs_tol",
}


def _merge(args):
    settings = {}
    if getattr(args, "config", None):
        settings = load_config(args.config)
        unknown = sorted(set(settings) - _FILE_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "mode" in settings and settings["mode"] != args.mode:
            raise ConfigError(f"config mode {settings['mode']!r} does not match subcommand {args.mode!r}")
        for alias in ("n", "x"):
            if alias in settings:
                settings.setdefault("points", settings.pop(alias))
    for key, value in vars(args).items():
        if key == "config" or value is None:
            continue
        settings[key] = value
    settings["mode"] = args.mode
    return settings


def _to_config(settings):
    mode = settings["mode"]
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    kw = {"mode": mode}
    try:
        series = SeriesControl(
            max_total_degree=int(settings.get("max_degree", 24)),
            abs_tol=float(settings.get("abs_tol", 1e-15)),
            degree_limit=max(400, int(settings.get("max_degree", 24))),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    kw["series"] = series
    kw["output_path"] = settings.get("output")
    kw["output_format"] = settings.get("format")

    if mode == "verify":
        suite = settings.get("suite", "all")
        if suite not in vf.SUITE_NAMES:
            raise ConfigError(f"unknown suite {suite!r}")
        if kw["output_format"] not in (None, "json"):
            raise ConfigError("verify writes JSON reports only")
        kw.update(suite=suite, record_timings=bool(settings.get("record_timings", False)), output_format="json")
        return RunConfig(**kw)

    lattice = mode.endswith("lattice")
    q = int(settings.get("q", 0))
    if lattice:
        if settings.get("d") is None:
            raise ConfigError("--d is required")
        d = int(settings["d"])
        if not 1 <= d <= 4 or not 0 <= q <= d:
            raise ConfigError(f"need 1 <= d <= 4 and 0 <= q <= d, got d={d}, q={q}")
        kw.update(d=d, q=q)
        threshold = 4.0 * q
    else:
        if settings.get("p") is None:
            raise ConfigError("--p is required")
        p = int(settings["p"])
        if p < 0 or q < 0 or p + q < 1:
            raise ConfigError(f"invalid signature ({p}, {q})")
        kw.update(p=p, q=q, gamma=float(settings.get("gamma", 1.0)))
        if not kw["gamma"] > 0:
            raise ConfigError("gamma must be positive")
        d = p + q
        threshold = 0.0

    raw_points = _as_list(settings.get("points"))
    if not raw_points:
        raw_points = [[0] * d]
    parse = _parse_int_vector if lattice else _parse_complex_vector
    points = tuple(parse(v) for v in raw_points)
    for pt in points:
        if len(pt) != d:
            raise ConfigError(f"point {pt} has length {len(pt)}, expected {d}")
    kw["points"] = points

    grid = settings.get("grid")
    if grid is not None:
        if not lattice:
            raise ConfigError("--grid applies to lattice modes only")
        grid = int(grid)
        if grid < 4:
            raise ConfigError("grid must be >= 4")
    kw["grid"] = grid
    method = settings.get("method")
    allowed = ("trapezoid", "bessel", "closed") if lattice else ("hyperbolic", "triangle")
    if method is not None and method not in allowed:
        raise ConfigError(f"method must be one of {allowed}")
    kw["method"] = method

    rays = []
    for item in _as_list(settings.get("ray")):
        rays.extend(_split_list(item))
    if rays:
        if mode.startswith("eval"):
            raise ConfigError("--ray applies to branch modes only")
        try:
            rays = tuple(math.radians(float(a)) for a in rays)
        except ValueError as exc:
            raise ConfigError(f"cannot parse rays {settings.get('ray')!r}") from exc
        if any(not 0.0 < a < math.pi for a in rays):
            raise ConfigError("ray angles must lie strictly between 0 and 180 degrees")
        kw["rays"] = rays
        ladder = settings.get("ladder")
        kw["ladder"] = _parse_ladder(ladder) if ladder is not None else vf.default_ladder(
            "lattice" if lattice else "continuum", kw.get("gamma", 1.0))
        kw["perturbation"] = float(settings.get("perturbation", 1.0))
        return RunConfig(**kw)
    if settings.get("ladder") is not None or settings.get("perturbation") is not None:
        raise ConfigError("--ladder and --perturbation need --ray")

    samples = [_parse_complex(v, "w") for v in _as_list(settings.get("w"))]
    samples += [_parse_complex(v, "z") - threshold for v in _as_list(settings.get("z"))]
    if settings.get("rect") is not None:
        samples += _parse_rect(settings["rect"])
    if not samples:
        raise ConfigError("no spectral samples given (use --w, --z or --rect)")
    for w in samples:
        if not w.imag > 0:
            raise ConfigError(f"spectral samples need Im > 0, got {format_complex(w + threshold)}")
    kw["samples"] = tuple(samples)
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# evaluation


def _point_text(pt):
    parts = []
    for v in pt:
        if isinstance(v, complex):
            parts.append(format_real(v.real) if v.imag == 0 else format_complex(v))
        else:
            parts.append(str(int(v)))
    return ",".join(parts)


def _row(cfg, pt, z, value=None, branching=None, remainder=None, error=None, nodes=None, message=None):
    def pair(v):
        return ("", "") if v is None else (format_real(v.real), format_real(v.imag))

    lattice = cfg.is_lattice
    row = {
        "mode": cfg.mode,
        "d": str(cfg.dimension),
        "p": str(cfg.dimension - cfg.q) if lattice else str(cfg.p),
        "q": str(cfg.q),
        "n_or_x": _point_text(pt),
    }
    row["re_z"], row["im_z"] = pair(complex(z))
    row["re_value"], row["im_value"] = pair(value)
    row["re_branching"], row["im_branching"] = pair(branching)
    row["re_remainder"], row["im_remainder"] = pair(remainder)
    row["error_estimate"] = "" if error is None else format_real(error)
    row["nodes"] = "" if nodes is None else str(int(nodes))
    if message is not None:
        row["error"] = message
    return row


def _evaluate(cfg, pt, w):
    z = w + cfg.threshold
    try:
        if cfg.mode == "eval-lattice":
            grid = TorusGrid(cfg.d, cfg.grid) if cfg.grid else None
            s = lt.lattice_kernel(cfg.d, z, pt, grid, cfg.method or "trapezoid")
            return _row(cfg, pt, z, s.value, error=s.error_estimate, nodes=s.quadrature_nodes)
        if cfg.mode == "branch-lattice":
            ctx = lt.ThresholdContext(cfg.d, cfg.q)
            grid = TorusGrid(cfg.d, cfg.grid) if cfg.grid else None
            s = lt.lattice_kernel(cfg.d, z, pt, grid, cfg.method or "trapezoid")
            b = lt.lattice_branching(ctx, w, pt, cfg.series)
            return _row(cfg, pt, z, s.value, b, s.value - b, s.error_estimate, s.quadrature_nodes)
        sig = (cfg.p, cfg.q)
        value, err = cm.continuum_kernel(sig, z, pt, cfg.gamma, cfg.series, cfg.method or "hyperbolic",
                                         return_error=True)
        if cfg.mode == "eval-continuum":
            return _row(cfg, pt, z, value, error=err)
        b = cm.continuum_branching(sig, z, pt, cfg.series)
        return _row(cfg, pt, z, value, b, value - b, err)
    except (ResolventError, ValueError, ArithmeticError) as exc:
        return _row(cfg, pt, z, message=f"{type(exc).__name__}: {exc}")


def _ray_rows(cfg, pt):
    target = "lattice" if cfg.is_lattice else "continuum"
    key = (cfg.d, cfg.q) if cfg.is_lattice else (cfg.p, cfg.q)
    radii = tuple(float(r) for r in cfg.ladder.offsets())
    point = tuple(pt) if cfg.is_lattice else tuple(complex(v) for v in pt)
    kern, branch = vf._ray_samples(target, key, point, cfg.rays, radii, float(cfg.gamma))
    rows = []
    for i, a in enumerate(cfg.rays):
        for j, r in enumerate(radii):
            z = r * complex(math.cos(a), math.sin(a)) + cfg.threshold
            b = cfg.perturbation * branch[i, j]
            rows.append(_row(cfg, pt, z, kern[i, j], b, kern[i, j] - b))
    return rows


def _map_ordered(fn, items):
    threads = vf.thread_count()
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda a: fn(*a), items))
    return [fn(*a) for a in items]


def _csv_text(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_HEADER, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(cfg, text):
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_verify(cfg):
    reports = vf.run_identity_suite(cfg.suite, cfg.series, record_timings=cfg.record_timings)
    _emit(cfg, vf.reports_to_json(reports))
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.check_id} residual={r.max_residual:.3e} tol={r.tolerance:.1e}", file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


def _run_rays(cfg):
    fmt = cfg.output_format or "json"
    if fmt == "csv":
        rows = [row for pt in cfg.points for row in _ray_rows(cfg, pt)]
        _emit(cfg, _csv_text(rows))
        return 0
    target = "lattice" if cfg.is_lattice else "continuum"
    sig = (cfg.d, cfg.q) if cfg.is_lattice else (cfg.p, cfg.q)
    reports = [
        vf.ray_limit_test(target, sig, pt, cfg.rays, cfg.ladder, cfg.perturbation, cfg.gamma).to_dict()
        for pt in cfg.points
    ]
    payload = reports[0] if len(reports) == 1 else reports
    _emit(cfg, json.dumps(payload, indent=2) + "\n")
    return 0


def run(config):
    """Execute a :class:`RunConfig`; returns the process exit status."""
    if config.mode == "verify":
        return _run_verify(config)
    if config.ray_mode:
        return _run_rays(config)
    items = [(pt, w) for pt in config.points for w in config.samples]
    rows = _map_ordered(lambda pt, w: _evaluate(config, pt, w), items)
    if (config.output_format or "csv") == "csv":
        _emit(config, _csv_text(rows))
    else:
        _emit(config, json.dumps(rows, indent=2) + "\n")
    failed = [r for r in rows if "error" in r]
    for r in failed:
        print(f"error at z={r['re_z']}{'+' if not r['im_z'].startswith('-') else ''}{r['im_z']}i "
              f"point={r['n_or_x']}: {r['error']}", file=sys.stderr)
    return 1 if failed else 0


_VALUE_FLAGS = frozenset(("--n", "--x", "--w", "--z", "--rect", "--ray", "--ladder"))


def _join_values(argv):
    """Glue ``--w -1+0.5i`` into ``--w=-1+0.5i`` so negative values parse."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_values(argv))
    try:
        config = _to_config(_merge(args))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ResolventError, ValueError, ArithmeticError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
