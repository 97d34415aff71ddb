"""Command-line front end: ``afhos {hos,sweep,verify,dump-config}``.

Link files are strict INI documents::

    [hop 1]
    model = generalized_gamma     ; gamma | generalized_gamma | deterministic
    m = 2.34
    xi = 1.23
    gamma_bar_db = 10             ; or gamma_bar = <linear ratio>

    [quadrature]                  ; optional: rel_tol, abs_tol, max_refinements
    [gl]                          ; optional: delta, richardson
    [montecarlo]                  ; optional: num_samples, seed, num_streams

Unknown sections or keys are errors.  Exit codes: 0 ok, 2 bad input,
3 quadrature failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import re
import sys
from dataclasses import dataclass, field, replace
from typing import Sequence

from .aux_z import GlConfig
from .capacity import HosResult, QuadratureConfig, ergodic_capacity, hos_moment
from .errors import AfhosError, ConfigError, ConvergenceError, DomainError
from .fading import (
    CustomHop,
    ExpMgf,
    GammaHop,
    GeneralizedGammaHop,
    LinkConfig,
    deterministic_hop,
)
from .metrics import aod as aod_metric
from .metrics import reliability
from .montecarlo import McConfig, mc_hos_orders

EXIT_OK, EXIT_PARSE, EXIT_CONVERGENCE, EXIT_VERIFY = 0, 2, 3, 4
CSV_HEADER = ["snr_db", "hops", "n", "mu", "mu_err", "aod", "reliability_pct", "error"]
DEFAULT_MC_SAMPLES = 10**6

_HOP_KEYS = {
    "gamma": {"m"},
    "generalized_gamma": {"m", "xi"},
    "deterministic": set(),
}
_SECTION_KEYS = {
    "quadrature": {"rel_tol": float, "abs_tol": float, "max_refinements": int},
    "gl": {"delta": float, "richardson": bool},
    "montecarlo": {"num_samples": int, "seed": int, "num_streams": int},
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a link file can specify."""

    link: LinkConfig
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    gl: GlConfig = field(default_factory=GlConfig)
    montecarlo: dict = field(default_factory=dict)


# ---------------------------------------------------------------- parsing


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _number(section, key, raw, kind=float):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return lowered in ("true", "yes", "1")
        value = kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"[{section}] {key}: value must be finite")
    return value


def _parse_hop(name, items):
    model = items.pop("model", None)
    if model not in _HOP_KEYS:
        raise ConfigError(f"[{name}] model must be one of {sorted(_HOP_KEYS)}, got {model!r}")
    has_lin, has_db = "gamma_bar" in items, "gamma_bar_db" in items
    if has_lin == has_db:
        raise ConfigError(f"[{name}] give exactly one of gamma_bar or gamma_bar_db")
    gamma_bar = (
        _number(name, "gamma_bar", items.pop("gamma_bar"))
        if has_lin
        else db_to_linear(_number(name, "gamma_bar_db", items.pop("gamma_bar_db")))
    )
    params = {}
    for key in _HOP_KEYS[model]:
        if key not in items:
            raise ConfigError(f"[{name}] missing key {key!r} for model {model}")
        params[key] = _number(name, key, items.pop(key))
    if items:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(items))}")
    try:
        if model == "gamma":
            return GammaHop(params["m"], gamma_bar)
        if model == "generalized_gamma":
            return GeneralizedGammaHop(params["m"], params["xi"], gamma_bar)
        return deterministic_hop(gamma_bar)
    except DomainError as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def parse_link_text(text: str) -> RunConfig:
    """Parse the contents of a link file."""
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed link file: {exc}") from None

    hops = {}
    extras = {}
    for name in parser.sections():
        items = dict(parser.items(name))
        match = re.fullmatch(r"hop (\d+)", name)
        if match:
            hops[int(match.group(1))] = _parse_hop(name, items)
        elif name in _SECTION_KEYS:
            allowed = _SECTION_KEYS[name]
            unknown = set(items) - set(allowed)
            if unknown:
                raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(unknown))}")
            extras[name] = {k: _number(name, k, v, allowed[k]) for k, v in items.items()}
        else:
            raise ConfigError(f"unknown section [{name}]")
    if not hops:
        raise ConfigError("link file defines no [hop N] sections")
    if sorted(hops) != list(range(1, len(hops) + 1)):
        raise ConfigError("hop sections must be numbered 1..L without gaps")

    try:
        quadrature = QuadratureConfig(**extras.get("quadrature", {}))
        gl = GlConfig(**extras.get("gl", {}))
        mc = extras.get("montecarlo", {})
        McConfig(**{"num_samples": 1, **mc})  # validation only
    except (DomainError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(LinkConfig([hops[i] for i in sorted(hops)]), quadrature, gl, mc)


def load_link_file(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_link_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read link file: {exc}") from None


def _gamma_bar_line(gamma_bar: float) -> str:
    db = 10.0 * math.log10(gamma_bar)
    if db_to_linear(db) == gamma_bar:
        return f"gamma_bar_db = {db!r}"
    return f"gamma_bar = {gamma_bar!r}"


def _is_deterministic(hop) -> bool:
    return isinstance(hop, CustomHop) and isinstance(hop.mgf_fn, ExpMgf) and hop == deterministic_hop(hop.mgf_fn.gamma_bar)


def _gamma_bar(hop) -> float:
    if _is_deterministic(hop):
        return hop.mgf_fn.gamma_bar
    if isinstance(hop, CustomHop):
        raise ConfigError("custom hops have no average SNR parameter")
    return hop.gamma_bar


def dump_link_text(cfg: RunConfig) -> str:
    """Serialize ``cfg`` so that :func:`parse_link_text` gives it back unchanged."""
    lines = []
    for i, hop in enumerate(cfg.link.hops, start=1):
        lines.append(f"[hop {i}]")
        if isinstance(hop, GammaHop):
            lines += ["model = gamma", f"m = {hop.m!r}"]
        elif isinstance(hop, GeneralizedGammaHop):
            lines += ["model = generalized_gamma", f"m = {hop.m!r}", f"xi = {hop.xi!r}"]
        elif _is_deterministic(hop):
            lines.append("model = deterministic")
        else:
            raise ConfigError("custom hops cannot be written to a link file")
        lines += [_gamma_bar_line(_gamma_bar(hop)), ""]
    q, g = cfg.quadrature, cfg.gl
    lines += ["[quadrature]", f"rel_tol = {q.rel_tol!r}", f"abs_tol = {q.abs_tol!r}", f"max_refinements = {q.max_refinements}", ""]
    lines += ["[gl]", f"delta = {g.delta!r}", f"richardson = {str(g.richardson).lower()}", ""]
    if cfg.montecarlo:
        lines.append("[montecarlo]")
        lines += [f"{k} = {v}" for k, v in sorted(cfg.montecarlo.items())]
        lines.append("")
    return "\n".join(lines)


def parse_int_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def parse_snr_range(text: str) -> list[float]:
    """``start:stop:step`` in dB, stop included."""
    try:
        start, stop, step = (float(tok) for tok in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if not (step > 0 and start <= stop and all(map(math.isfinite, (start, stop, step)))):
        raise argparse.ArgumentTypeError("need finite start <= stop and step > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


# ---------------------------------------------------------------- commands


def _fmt(x: float) -> str:
    return repr(float(x))


def _scale(value: float, n: int, bits: bool) -> float:
    return value / math.log(2.0) ** n if bits else value


def _configs(run: RunConfig, args):
    q, g = run.quadrature, run.gl
    if args.rel_tol is not None:
        q = replace(q, rel_tol=args.rel_tol)
    if args.delta is not None:
        g = replace(g, delta=args.delta)
    return q, g


def _moment(link, n, q, g) -> HosResult:
    return ergodic_capacity(link, q) if n == 1 else hos_moment(link, n, q, g)


def _check_orders(orders):
    bad = [n for n in orders if not 0 <= n <= 4]
    if bad:
        raise ConfigError(f"orders must lie in 0..4, got {bad}")


def cmd_hos(args, out) -> int:
    run = load_link_file(args.link)
    q, g = _configs(run, args)
    orders = args.orders or [1, 2, 3, 4]
    _check_orders(orders)
    rows = []
    for n in orders:
        try:
            r = _moment(run.link, n, q, g)
        except ConvergenceError as exc:
            for m, val, err in rows:
                print(f"partial: n={m} mu={_fmt(val)} mu_err={_fmt(err)}", file=sys.stderr)
            if exc.partial is not None:
                print(f"partial: n={n} mu={_fmt(exc.partial.value)} mu_err={_fmt(exc.partial.err_estimate)}", file=sys.stderr)
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONVERGENCE
        rows.append((n, _scale(r.value, n, args.bits), _scale(r.err_estimate, n, args.bits)))
    out.write("n,mu,mu_err\n")
    for n, val, err in rows:
        out.write(f"{n},{_fmt(val)},{_fmt(err)}\n")
    return EXIT_OK


def _link_for(template: LinkConfig, hops: int, gamma_bar: float) -> LinkConfig:
    """``hops`` hops taken cyclically from the template, all at ``gamma_bar``."""
    out = []
    for i in range(hops):
        hop = template.hops[i % len(template.hops)]
        if isinstance(hop, CustomHop):
            _gamma_bar(hop)  # rejects anything but a deterministic hop
            out.append(deterministic_hop(gamma_bar))
        else:
            out.append(replace(hop, gamma_bar=gamma_bar))
    return LinkConfig(out)


def sweep_rows(run: RunConfig, snr_db: Sequence[float], hop_counts: Sequence[int], orders: Sequence[int], q, g, bits=False):
    """Yield CSV rows for the sweep grid in (SNR, hops, n) order."""
    for db in snr_db:
        for hops in hop_counts:
            link = _link_for(run.link, hops, db_to_linear(db))
            results, errors = {}, {}
            for n in sorted(set(orders) | {1, 2}):
                try:
                    results[n] = _moment(link, n, q, g)
                except (ConvergenceError, ArithmeticError) as exc:
                    errors[n] = type(exc).__name__
            a = rel = ""
            if 1 in results and 2 in results:
                try:
                    value = aod_metric(results[1].value, results[2].value)
                    a, rel = _fmt(value), _fmt(reliability(value))
                except AfhosError as exc:
                    errors.setdefault(2, type(exc).__name__)
            for n in orders:
                if n in results:
                    mu = _fmt(_scale(results[n].value, n, bits))
                    err = _fmt(_scale(results[n].err_estimate, n, bits))
                else:
                    mu = err = ""
                marker = errors.get(n) or next(iter(errors.values()), "")
                yield [_fmt(db), str(hops), str(n), mu, err, a, rel, marker]


def cmd_sweep(args, out) -> int:
    run = load_link_file(args.link)
    q, g = _configs(run, args)
    orders = args.orders or [1, 2]
    _check_orders(orders)
    snr = args.snr_db if args.snr_db is not None else [10.0 * math.log10(_gamma_bar(run.link.hops[0]))]
    hop_counts = args.hops or [len(run.link)]
    if any(h < 1 for h in hop_counts):
        raise ConfigError("hop counts must be >= 1")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    failed = False
    for row in sweep_rows(run, snr, hop_counts, orders, q, g, args.bits):
        failed |= bool(row[-1])
        writer.writerow(row)
    return EXIT_CONVERGENCE if failed else EXIT_OK


def z_score(analytic: float, mean: float, std_error: float) -> float:
    diff = analytic - mean
    if std_error > 0:
        return diff / std_error
    # zero spread: exact agreement up to quadrature accuracy counts as z = 0
    if abs(diff) <= 1e-6 * max(1.0, abs(mean)):
        return 0.0
    return math.copysign(math.inf, diff)


def verify_report(run: RunConfig, orders, mc: McConfig, q, g):
    """Return ``(rows, ok)`` with one row ``(n, analytic, mean, se, z)`` per order."""
    estimates = mc_hos_orders(run.link, orders, mc)
    rows, ok = [], True
    for n in orders:
        analytic = _moment(run.link, n, q, g).value
        est = estimates[n]
        z = z_score(analytic, est.mean, est.std_error)
        ok &= abs(z) <= 3.0
        rows.append((n, analytic, est.mean, est.std_error, z))
    return rows, ok


def cmd_verify(args, out) -> int:
    run = load_link_file(args.link)
    q, g = _configs(run, args)
    orders = args.orders or [1, 2, 3, 4]
    _check_orders(orders)
    mc_opts = dict(run.montecarlo)
    if args.mc_samples is not None:
        mc_opts["num_samples"] = args.mc_samples
    if args.seed is not None:
        mc_opts["seed"] = args.seed
    mc_opts.setdefault("num_samples", DEFAULT_MC_SAMPLES)
    try:
        mc = McConfig(**mc_opts)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    try:
        rows, ok = verify_report(run, orders, mc, q, g)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE

    out.write(f"# samples={mc.num_samples} seed={mc.seed} streams={mc.num_streams}\n")
    out.write(f"{'n':>2} {'analytic':>14} {'mc_mean':>14} {'mc_std_err':>12} {'z':>8}\n")
    for n, analytic, mean, se, z in rows:
        out.write(f"{n:>2} {analytic:>14.8g} {mean:>14.8g} {se:>12.4g} {z:>8.3f}\n")
    out.write("n,analytic,mc_mean,mc_std_error,z\n")
    for n, analytic, mean, se, z in rows:
        out.write(f"{n},{_fmt(analytic)},{_fmt(mean)},{_fmt(se)},{_fmt(z)}\n")
    out.write(f"result: {'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_dump_config(args, out) -> int:
    run = load_link_file(args.link)
    q, g = _configs(run, args)
    out.write(dump_link_text(RunConfig(run.link, q, g, run.montecarlo)))
    return EXIT_OK


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="afhos", description="Capacity moments of AF multihop fading links.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--link", required=True, help="link file (INI)")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--delta", type=float, help="Grünwald-Letnikov step")
        p.add_argument("--rel-tol", type=float, help="quadrature relative tolerance")
        return p

    p = common(sub.add_parser("hos", help="capacity moments of the link"))
    p.add_argument("--orders", type=parse_int_list)
    p.add_argument("--bits", action="store_true", help="report in bits instead of nats")
    p.set_defaults(func=cmd_hos)

    p = common(sub.add_parser("sweep", help="moments and AoD over an SNR / hop-count grid"))
    p.add_argument("--orders", type=parse_int_list)
    p.add_argument("--snr-db", type=parse_snr_range, help="start:stop:step in dB")
    p.add_argument("--hops", type=parse_int_list, help="hop counts, e.g. 1,2,3")
    p.add_argument("--bits", action="store_true", help="report mu in bits instead of nats")
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("verify", help="compare analytic moments with Monte-Carlo"))
    p.add_argument("--orders", type=parse_int_list)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("dump-config", help="write the normalized link file"))
    p.set_defaults(func=cmd_dump_config)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    buffer = io.StringIO()
    try:
        code = args.func(args, buffer)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    text = buffer.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
