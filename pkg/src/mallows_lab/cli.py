"""mallows-lab: sample, tabulate, verify and plot Mallows permutations.

Usage:
  mallows-lab sample --n 10 --q 0.5 --count 5 --seed 1
  mallows-lab sample --n 3 --q 0.5 --count 1000 --annotate
  mallows-lab exact --n 3 --q 0.5
  mallows-lab verify identity --n 100 --q 0.001 --format json
  mallows-lab verify mueller-starr --beta -2 0 1 --count 100
  mallows-lab points --n 2000 --q 0.99 --format svg --output cloud.svg

Every command writes its effective configuration as a leading ``# {json}``
line (an XML comment in SVG). Passing that JSON back through ``--config``
reproduces the output byte for byte; explicit flags win over the file.

Exit codes: 0 success or PASS, 1 verification FAIL, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .bounds import ConstantsConfig, DEFAULT_CONSTANTS
from .exact import enumerate_distribution
from .model import MallowsParams, partition_function
from .montecarlo import collect
from .rng import SeedSpec
from .verify import EXPERIMENTS, resolve_q, run_verification

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_SVG_N = 1_000_000
SVG_SIZE = 600.0
SVG_PAD = 30.0


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

# flag defaults, applied after the --config file; None means "not given"
DEFAULTS = {
    "sample": {"n": None, "q": None, "beta": None, "count": 1, "seed": 0, "stream": 0, "workers": 1,
               "annotate": False},
    "exact": {"n": None, "q": None, "beta": None},
    "verify": {"experiment": None, "n": None, "q": None, "beta": None, "count": None, "seed": 0, "stream": 0,
               "workers": 1, "margin_k": 4.0, "format": "text", "constants": None, "set": None},
    "points": {"n": None, "q": None, "beta": None, "seed": 0, "stream": 0, "k": 2.0, "format": "csv"},
}
# keys that never appear in the echoed configuration
NOT_ECHOED = {"workers", "output", "config", "command"}


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    text = text.strip()
    if text.startswith("<"):
        # echoed SVG output: the configuration is the first XML comment
        text = text.partition("<!--")[2].partition("-->")[0]
    text = text.strip()
    if text.startswith("#"):
        text = text.splitlines()[0][1:]
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def effective_config(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < explicit flags."""
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    if args.config:
        loaded = _load_config(args.config)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {cmd}: {sorted(unknown)}")
        cfg.update(loaded)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            cfg[key] = value
    if cfg.get("q") is not None:
        cfg["q"] = [_q_entry(v) for v in cfg["q"]] if isinstance(cfg["q"], list) else _q_entry(cfg["q"])
    if cmd == "verify":
        constants = dict(cfg["constants"] or {})
        for key in ("C", "c", "C0", "c1"):
            flag = getattr(args, f"const_{key}", None)
            if flag is not None:
                constants[key] = flag
        cfg["constants"] = ConstantsConfig.from_mapping({**DEFAULT_CONSTANTS.as_dict(), **constants}).as_dict()
        cfg["set"] = {**(cfg["set"] or {}), **_parse_set(args.set_items)}
    return cfg


def _single_q(cfg: dict) -> tuple[int, float]:
    n, q, beta = cfg["n"], cfg["q"], cfg["beta"]
    if n is None:
        raise UsageError("--n is required")
    n = int(n)
    if q is not None and beta is not None:
        raise UsageError("give exactly one of --q and --beta")
    if q is None and beta is None:
        q = cfg["q"] = 1.0
    q = 1.0 - float(beta) / n if q is None else resolve_q(q, n)
    if not (math.isfinite(q) and q > 0):
        raise UsageError(f"q must be positive, got {q!r}")
    MallowsParams(n, q)
    return n, q


def _header(cfg: dict) -> str:
    return "# " + json.dumps({k: v for k, v in cfg.items() if k not in NOT_ECHOED}, sort_keys=True)


def _seed(cfg: dict) -> SeedSpec:
    return SeedSpec(int(cfg["seed"]), int(cfg["stream"]))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_sample(cfg: dict, workers: int) -> tuple[str, int]:
    n, q = _single_q(cfg)
    count = int(cfg["count"])
    if count < 1:
        raise UsageError("--count must be positive")

    def features(block):
        if not cfg["annotate"]:
            return block.perms
        extra = np.column_stack([_kernels.inv_rows(block.perms), block.lis, block.lds])
        return np.hstack([block.perms, extra])

    rows = collect(MallowsParams(n, q), features, count, _seed(cfg), workers)
    lines = [_header(cfg)]
    if cfg["annotate"]:
        lines.append("perm,inv,lis,lds")
        for row in rows:
            inv, lis, lds = row[n:]
            lines.append(f"{' '.join(map(str, row[:n].tolist()))},{inv},{lis},{lds}")
    else:
        lines.extend(" ".join(map(str, row.tolist())) for row in rows)
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_exact(cfg: dict, workers: int) -> tuple[str, int]:
    n, q = _single_q(cfg)
    dist = enumerate_distribution(n, q)
    try:
        z = repr(partition_function(n, q))
    except OverflowError:
        z = "inf"
    head = _header(cfg) + "\n" + f"# Z={z} log_Z={dist.log_z!r}\n"
    return head + dist.to_csv(), EXIT_OK


def _verify_grid(cfg: dict) -> dict:
    exp = cfg["experiment"]
    defaults = EXPERIMENTS[exp].defaults
    grid = {}
    if cfg["n"] is not None:
        grid["n"] = [int(v) for v in _as_list(cfg["n"])]
    if cfg["q"] is not None:
        grid["q"] = [_q_entry(v) for v in _as_list(cfg["q"])]
    if cfg["beta"] is not None:
        betas = [float(b) for b in _as_list(cfg["beta"])]
        if "beta" in defaults:
            grid["beta"] = betas
        elif cfg["q"] is not None:
            raise UsageError("give exactly one of --q and --beta")
        else:
            grid["q"] = [f"1-({b!r})/n" for b in betas]
    grid.update(cfg["set"])
    unknown = set(grid) - set(defaults)
    if unknown:
        raise UsageError(f"experiment {exp} has no parameters {sorted(unknown)}; known: {sorted(defaults)}")
    return grid


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _q_entry(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        resolve_q(v, 10)  # reject malformed expressions early
        return v


def cmd_verify(cfg: dict, workers: int) -> tuple[str, int]:
    exp = cfg["experiment"]
    if exp not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {exp!r}; known: {', '.join(EXPERIMENTS)}")
    report = run_verification(
        exp,
        grid=_verify_grid(cfg),
        constants=ConstantsConfig.from_mapping(cfg["constants"]),
        count=cfg["count"],
        seed=_seed(cfg),
        margin_k=float(cfg["margin_k"]),
        workers=workers,
    )
    if cfg["format"] == "json":
        doc = {"config": json.loads(_header(cfg)[2:]), **json.loads(report.to_json())}
        body = json.dumps(doc, indent=2) + "\n"
    else:
        body = _header(cfg) + "\n" + report.to_text()
    return body, EXIT_OK if report.passed else EXIT_FAIL


def _strip_halfwidth(q: float, k: float) -> float:
    """k/(1-q) for q < 1; for q > 1 the strip follows the anti-diagonal with width k/(1-1/q)."""
    if abs(q - 1) < 1e-12:
        return math.inf
    return k / (1 - q) if q < 1 else k / (1 - 1 / q)


def cmd_points(cfg: dict, workers: int) -> tuple[str, int]:
    n, q = _single_q(cfg)
    fmt = cfg["format"]
    if fmt not in ("csv", "svg"):
        raise UsageError("points supports --format csv or svg")
    if fmt == "svg" and n > MAX_SVG_N:
        raise UsageError(f"svg output is limited to n <= {MAX_SVG_N}")
    k = float(cfg["k"])
    if k <= 0:
        raise UsageError("--k must be positive")
    p = collect(MallowsParams(n, q), lambda b: b.perms, 1, _seed(cfg), workers)[0]
    i = np.arange(1, n + 1)
    w = _strip_halfwidth(q, k)
    centre = i if q <= 1 else n + 1 - i
    in_strip = np.abs(p - centre) <= w
    if fmt == "csv":
        lines = [_header(cfg), "i,pi_i,in_strip"]
        lines.extend(f"{a},{b},{'true' if s else 'false'}" for a, b, s in zip(i.tolist(), p.tolist(), in_strip))
        return "\n".join(lines) + "\n", EXIT_OK
    return _svg(n, q, p, w, _header(cfg)[2:]), EXIT_OK


def _svg(n: int, q: float, p: np.ndarray, w: float, config_json: str) -> str:
    span = SVG_SIZE - 2 * SVG_PAD
    r = max(0.5, 300.0 / n)

    def sx(x):
        return SVG_PAD + (x - 0.5) / n * span

    def sy(y):
        return SVG_SIZE - SVG_PAD - (y - 0.5) / n * span

    def f(v):
        return f"{v:.3f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- {config_json.replace('--', '- -')} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(SVG_SIZE)}" height="{int(SVG_SIZE)}" '
        f'viewBox="0 0 {int(SVG_SIZE)} {int(SVG_SIZE)}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{f(SVG_PAD)}" y1="{f(SVG_SIZE - SVG_PAD)}" x2="{f(SVG_SIZE - SVG_PAD)}" '
        f'y2="{f(SVG_SIZE - SVG_PAD)}" stroke="black"/>',
        f'<line x1="{f(SVG_PAD)}" y1="{f(SVG_SIZE - SVG_PAD)}" x2="{f(SVG_PAD)}" y2="{f(SVG_PAD)}" stroke="black"/>',
        f'<text x="{f(SVG_SIZE / 2)}" y="{f(SVG_SIZE - 8)}" font-size="12" text-anchor="middle">i</text>',
        f'<text x="10" y="{f(SVG_SIZE / 2)}" font-size="12" text-anchor="middle">&#960;(i)</text>',
    ]
    if math.isfinite(w) and w < n:
        for sign in (1, -1):
            # the line y = x + sign*w (or its mirror for q > 1), clipped to [0.5, n+0.5]^2
            x0, x1 = (0.5, n + 0.5 - w) if sign > 0 else (0.5 + w, n + 0.5)
            y0, y1 = x0 + sign * w, x1 + sign * w
            if q > 1:
                y0, y1 = n + 1 - y0, n + 1 - y1
            out.append(
                f'<line x1="{f(sx(x0))}" y1="{f(sy(y0))}" x2="{f(sx(x1))}" y2="{f(sy(y1))}" '
                'stroke="steelblue" stroke-dasharray="4 3"/>'
            )
    out.append('<g fill="black">')
    out.extend(
        f'<circle cx="{f(sx(a))}" cy="{f(sy(b))}" r="{f(r)}"/>' for a, b in zip(range(1, n + 1), p.tolist())
    )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


COMMANDS = {"sample": cmd_sample, "exact": cmd_exact, "verify": cmd_verify, "points": cmd_points}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, seeded: bool = True) -> None:
    p.add_argument("--config", help="JSON file of defaults (explicit flags win)")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    if seeded:
        p.add_argument("--seed", type=int, help="base seed (default 0)")
        p.add_argument("--stream", type=int, help="stream id under the seed (default 0)")
        p.add_argument("--workers", type=int, default=1, help="worker threads; never changes output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mallows-lab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw permutations from the Mallows measure")
    p.add_argument("--n", type=int)
    p.add_argument("--q", help="number or expression in n such as 1-4/n")
    p.add_argument("--beta", type=float, help="sets q = 1 - beta/n")
    p.add_argument("--count", "--trials", dest="count", type=int)
    p.add_argument("--annotate", action="store_true", help="CSV with inv, lis, lds columns")
    _add_common(p)

    p = sub.add_parser("exact", help="exact probability table over S_n (n <= 10)")
    p.add_argument("--n", type=int)
    p.add_argument("--q")
    p.add_argument("--beta", type=float)
    _add_common(p, seeded=False)

    p = sub.add_parser("verify", help="run a verification experiment")
    p.add_argument("experiment", nargs="?", help=", ".join(EXPERIMENTS))
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--q", nargs="+", help="numbers or expressions in n")
    p.add_argument("--beta", type=float, nargs="+")
    p.add_argument("--count", "--trials", dest="count", type=int)
    p.add_argument("--margin-k", dest="margin_k", type=float, help="margin in standard errors (default 4)")
    p.add_argument("--format", choices=["text", "json"])
    for key in ("C", "c", "C0", "c1"):
        p.add_argument(f"--{key}", dest=f"const_{key}", type=float, help=f"constant {key}")
    p.add_argument("--set", dest="set_items", action="append", metavar="KEY=VALUE",
                   help="override any grid entry; VALUE is parsed as JSON when possible")
    _add_common(p)

    p = sub.add_parser("points", help="graphical representation of one sample")
    p.add_argument("--n", type=int)
    p.add_argument("--q")
    p.add_argument("--beta", type=float)
    p.add_argument("--k", type=float, help="strip half-width in units of 1/(1-q) (default 2)")
    p.add_argument("--format", choices=["csv", "svg"])
    _add_common(p)
    return parser


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        if args.command == "verify" and cfg["experiment"] is None:
            raise UsageError("verify needs an experiment name")
        workers = max(1, int(getattr(args, "workers", 1) or 1))
        text, code = COMMANDS[args.command](cfg, workers)
        _write(text, args.output)
    except (UsageError, ValueError, KeyError, OverflowError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"mallows-lab {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
