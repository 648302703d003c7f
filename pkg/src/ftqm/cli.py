"""``ftqm`` command line: threshold and resource tables as CSV, simulations and self-checks.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from . import __version__
from . import analytics as an
from . import codes as cd
from .channels import PauliChannel, make_rng
from .protocols import PhaseValue, ProtocolParams, run_protocol
from .verify import SUITES, run_suite, summary_ok

THRESHOLD_PROTOCOLS = an.PROTOCOLS + ("II",)
RESOURCE_PROTOCOLS = ("Ia", "Ib", "II")
SIM_PROTOCOLS = ("Ia", "Ib", "Ic", "II")
_BOOL_DESTS = {"log_grid", "exact", "ia_device"}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

_PI_EXPR = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_angle(text: str) -> float:
    """A float, or an expression like ``pi/32`` or ``3*pi/16``."""
    text = str(text).strip()
    m = _PI_EXPR.match(text)
    try:
        if m:
            num = float(m.group(1)) if m.group(1) else 1.0
            den = float(m.group(2)) if m.group(2) else 1.0
            return num * math.pi / den
        return float(text)
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}")


def parse_int_range(text: str) -> list[int]:
    """``4`` or ``1:8`` (inclusive)."""
    try:
        parts = [int(x) for x in str(text).split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None
    if len(parts) == 1:
        return parts
    if len(parts) == 2 and parts[0] <= parts[1]:
        return list(range(parts[0], parts[1] + 1))
    raise argparse.ArgumentTypeError(f"bad integer range {text!r}")


def parse_grid(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, steps = str(text).split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be min:max:steps, got {text!r}") from None
    if steps < 1 or hi < lo or (steps > 1 and hi == lo):
        raise argparse.ArgumentTypeError("grid must be ascending with steps >= 1")
    return lo, hi, steps


def grid_values(grid: tuple[float, float, int], log: bool) -> list[float]:
    lo, hi, steps = grid
    if steps == 1:
        return [lo]
    if log:
        if lo <= 0:
            raise UsageError("log grid needs a positive minimum")
        return [float(x) for x in np.geomspace(lo, hi, steps)]
    return [float(x) for x in np.linspace(lo, hi, steps)]


def parse_noise(text: str) -> PauliChannel:
    try:
        return PauliChannel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def probability(text: str) -> float:
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"{text} is not a probability")
    return v


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftqm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ftqm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codes", help="dump RM-derived codes and weight distributions")
    p.add_argument("-m", "--order", type=int, required=True)
    _common(p)

    p = sub.add_parser("threshold", help="interrogation noise thresholds as CSV")
    p.add_argument("--protocol", choices=THRESHOLD_PROTOCOLS, default="Ia")
    p.add_argument("--gamma", type=parse_angle, default="pi/32")
    p.add_argument("-j", "--bit-index", "-t", "--bits", dest="index", type=parse_int_range,
                   default="4", help="bit index j (or t for Ia/II); a range a:b gives one row set each")
    p.add_argument("--device-noise", type=probability, default="0")
    p.add_argument("--grid", type=parse_grid, help="device-noise grid min:max:steps")
    p.add_argument("--log-grid", action="store_true", help="geometric grid spacing")
    p.add_argument("--ia-device", action="store_true",
                   help="include encode/measure noise in the Ia threshold")
    _common(p)

    p = sub.add_parser("resources", help="interrogation counts and precision as CSV")
    p.add_argument("--protocol", choices=RESOURCE_PROTOCOLS, default="Ia")
    p.add_argument("--gamma", type=parse_angle, default="pi/32")
    p.add_argument("-t", "--bits", type=parse_int_range, default="1:5")
    p.add_argument("--epsilon", type=probability, help="failure budget; default 2^-t per row")
    p.add_argument("--noise", type=parse_noise, default="0")
    p.add_argument("--phi", type=parse_angle, help="phase fixing the Protocol II radices")
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimation runs as CSV")
    p.add_argument("--protocol", choices=SIM_PROTOCOLS, default="Ia")
    p.add_argument("--phi", type=parse_angle, required=True)
    p.add_argument("--gamma", type=parse_angle, default="pi/32")
    p.add_argument("-t", "--bits", type=int, default=4)
    p.add_argument("--epsilon", type=probability, default="0.0625")
    p.add_argument("--noise", type=parse_noise, default="0")
    p.add_argument("--device-noise", type=probability)
    p.add_argument("--repetitions", type=int, help="fixed M; default from the Hoeffding bound")
    p.add_argument("--exact", action="store_true", help="exact marginal flip rates")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    _common(p)

    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("suite", nargs="?", choices=SUITES, default="all")
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--seed", type=int)
    _common(p)
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                out[key.replace("-", "_")] = value
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = _read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    aliases = {"bit_index": "index", "bits": "index"} if args.command == "threshold" else {}
    defaults = {}
    for key, value in values.items():
        dest = aliases.get(key, key)
        if dest not in known or dest in ("config", "help", "suite"):
            parser.error(f"unknown config key {key!r}")
        if dest in _BOOL_DESTS:
            defaults[dest] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[dest] = value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("FTQM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"FTQM_SEED={env!r} is not an integer") from None


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{x:.12g}"
    return str(x)


def _config_lines(args: argparse.Namespace) -> list[str]:
    lines = [f"# ftqm {__version__} {args.command}"]
    for key in sorted(vars(args)):
        if key in ("out", "config", "command", "workers"):
            continue
        value = getattr(args, key)
        if isinstance(value, PauliChannel):
            value = value.to_text()
        elif isinstance(value, float):
            value = fmt(value)
        elif isinstance(value, (list, tuple)):
            value = ":".join(fmt(v) for v in value)
        lines.append(f"# {key}={value}")
    return lines


def write_csv(args, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for line in _config_lines(args):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _dist_text(dist: cd.WeightDistribution) -> str:
    return " ".join(f"{w}:{c}" for w, c in dist.counts.items())


def cmd_codes(args) -> str:
    m = args.order
    if not 2 <= m <= 8:
        raise UsageError("codes: m must lie in [2, 8]")
    bar, star = cd.shortened_rm(m), cd.punctured_rm(m)
    ham = cd.dual(bar)
    out = [f"# ftqm {__version__} codes m={m}",
           f"RM(1,{m}) generator {1 + m}x{1 << m}", cd.rm_generator(1, m).to_text(), ""]
    for label, code, dist in (
            (f"RM-bar(1,{m})", bar, cd.shortened_rm_distribution(m)),
            (f"RM*(1,{m})", star, cd.punctured_rm_distribution(m)),
            (f"Hamming dual of RM-bar(1,{m})", ham, cd.macwilliams_transform(cd.shortened_rm_distribution(m)))):
        out += [f"{label} n={code.n} k={code.k}",
                "generator", code.generator.to_text() or "(none)",
                "parity check", code.parity_check.to_text() or "(none)",
                f"weights {_dist_text(dist)}", ""]
    return "\n".join(out) + "\n"


def cmd_threshold(args) -> str:
    if args.grid:
        p_primes = grid_values(args.grid, args.log_grid)
    else:
        p_primes = [args.device_noise]
    rows = []
    for j in args.index:
        if j < 1:
            raise UsageError("bit index must be >= 1")
        for pp in sorted(p_primes):
            if args.protocol == "II":
                try:
                    pth = an.threshold_ii(j)
                except an.NoThresholdError:
                    pth = None
            else:
                pth = an.threshold_point(args.protocol, args.gamma, j, pp, args.ia_device)
            rows.append([pp, pth, None if pth is None else 1 - pth, args.protocol, j, args.gamma])
    return write_csv(args, ["p_prime", "p_th", "one_minus_p_th", "protocol", "j", "gamma"], rows)


def _resources(args, t: int, eps: float) -> float:
    p = args.noise.p
    if args.protocol == "Ia":
        return an.resources_ia(args.gamma, t, eps, p)
    if args.protocol == "Ib":
        return an.resources_ib(args.gamma, t, eps, p)
    if args.phi is not None:
        _, radices = PhaseValue(args.phi).mixed_digits(t)
    else:
        radices = [3] * t  # worst case
    return an.resources_ii(t, eps, p, radices)


def cmd_resources(args) -> str:
    rows = []
    for t in args.bits:
        if t < 1:
            raise UsageError("t must be >= 1")
        eps = args.epsilon if args.epsilon is not None else 2.0 ** -t
        try:
            n, ok = _resources(args, t, eps), True
        except an.NonConvergentError:
            n, ok = None, False
        rows.append([args.protocol, t, eps, n, an.stddev_phi(t, eps), int(ok)])
    return write_csv(args, ["protocol", "t", "epsilon", "N", "delta_phi", "converged"], rows)


def _simulate_one(i: int, protocol, phi, params, channel, p_prime, exact, seed):
    return run_protocol(protocol, phi, params, channel, make_rng(seed, i), p_prime, exact)


def cmd_simulate(args) -> str:
    seed = resolve_seed(args.seed)
    if args.trials < 1 or args.workers < 1:
        raise UsageError("trials and workers must be positive")
    if args.protocol == "Ic" and args.device_noise is None:
        raise UsageError("Protocol Ic needs --device-noise")
    gamma = math.pi / 12 if args.protocol == "II" else args.gamma
    try:
        params = ProtocolParams(gamma, args.bits, args.epsilon, args.repetitions,
                                "mixed-radix" if args.protocol == "II" else "fixed-binary")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    args.seed = seed
    job = partial(_simulate_one, protocol=args.protocol, phi=args.phi, params=params,
                  channel=args.noise, p_prime=args.device_noise, exact=args.exact, seed=seed)
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(job, range(args.trials), chunksize=16))
    else:
        results = [job(i) for i in range(args.trials)]
    rows = []
    for i, r in enumerate(results):
        rows.append([i, r.protocol, args.phi, "".join(map(str, r.digits)),
                     "".join(map(str, r.radices)), r.phi_hat, r.aborted_at, r.interrogations,
                     r.interrogations_full_restart, r.retransmissions, int(r.correct)])
    frac = sum(r.correct for r in results) / len(results)
    rows.append(["summary", args.protocol, args.phi, "", "", None, None,
                 sum(r.interrogations for r in results), sum(r.interrogations_full_restart for r in results),
                 sum(r.retransmissions for r in results), frac])
    header = ["run", "protocol", "phi", "digits", "radices", "phi_hat", "aborted_at",
              "interrogations", "interrogations_full_restart", "retransmissions", "correct"]
    return write_csv(args, header, rows)


def cmd_verify(args) -> tuple[str, bool]:
    results = run_suite(args.suite, resolve_seed(args.seed), args.trials)
    ok = summary_ok(results)
    lines = [r.line() for r in results]
    lines.append(f"{'OK' if ok else 'FAILED'}: {sum(r.passed for r in results)}/{len(results)} checks passed")
    return "\n".join(lines) + "\n", ok


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        if args.command == "verify":
            text, ok = cmd_verify(args)
            emit(args, text)
            return 0 if ok else 1
        handler = {"codes": cmd_codes, "threshold": cmd_threshold,
                   "resources": cmd_resources, "simulate": cmd_simulate}[args.command]
        emit(args, handler(args))
        return 0
    except UsageError as exc:
        print(f"ftqm: error: {exc}", file=sys.stderr)
        return 2
    except an.NonConvergentError as exc:
        print(f"ftqm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
