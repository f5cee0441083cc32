"""Command-line interface.

Subcommands: ``bounds``, ``classify``, ``simulate``, ``partition``, ``sweep``.
Every run is deterministic given ``--seed``; output CSVs embed the full
configuration as comment lines and are written atomically, so a failed run
leaves no partial file.  Exit codes: 0 success, 2 input error, 3 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .capacity import (avwc_csr_lower_bound, avwc_lower_bound, avwc_upper_bound,
                       less_noisy_secrecy_capacity)
from .channels import ChannelFamily, Distribution, WiretapPair
from .coding import (CsrDecoder, generate_codebook, worst_state_error)
from .errors import ChannelFileError, ValidationError
from .files import parse_channel_text
from .ordering import classify_degradation, classify_less_noisy
from .partition import secure_pipeline
from .presets import PRESETS, load_preset, preset_text
from .typicality import TypicalityParams

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3


class InputError(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, np.ndarray):
        return "|".join(f"{v:.12g}" for v in value.ravel())
    if isinstance(value, tuple):
        return "".join(str(v) for v in value)
    return str(value)


def _config_hash(args: argparse.Namespace) -> str:
    blob = repr(sorted((k, str(v)) for k, v in vars(args).items() if k != "func"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _write_csv(path: str, args, header: list[str], rows: list[list]):
    lines = [f"# avwc {__version__}",
             f"# seed={getattr(args, 'seed', 0)}",
             f"# config={_config_hash(args)}"]
    for key, value in sorted(vars(args).items()):
        if key in ("func", "out"):
            continue
        lines.append(f"# {key}={value}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".avwc-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_assignments(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise InputError(f"--set expects name=value, got {item!r}")
        name, value = item.split("=", 1)
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"bad numeric value in {item!r}") from None
    return out


def _parse_grid(spec: str | None):
    """name=start:stop:step into (name, values); inclusive endpoint."""
    if spec is None:
        return None
    if "=" not in spec:
        raise InputError("grid must look like p=0.05:0.45:0.05")
    name, rng = spec.split("=", 1)
    parts = rng.split(":")
    if len(parts) != 3:
        raise InputError("grid range must be start:stop:step")
    try:
        start, stop, step = (float(v) for v in parts)
    except ValueError:
        raise InputError(f"bad grid numbers in {spec!r}") from None
    if step <= 0 or stop < start:
        raise InputError("grid needs step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    values = [start + i * step for i in range(count) if start + i * step <= stop + 1e-12]
    if not values:
        raise InputError("empty grid")
    return name.strip(), values


def _load_channel(args, want_pair: bool | None = None):
    params = _parse_assignments(getattr(args, "set", None))
    if getattr(args, "preset", None):
        text = preset_text(args.preset)
    elif getattr(args, "channel_file", None):
        try:
            with open(args.channel_file, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise InputError(f"cannot read {args.channel_file}: {exc}") from None
    else:
        raise InputError("provide --preset or a channel file")

    def build(extra=None):
        merged = dict(params)
        if extra:
            merged.update(extra)
        obj = parse_channel_text(text, merged or None)
        if want_pair is True and not isinstance(obj, WiretapPair):
            raise InputError("this command needs a wiretap pair file")
        if want_pair is False and not isinstance(obj, ChannelFamily):
            raise InputError("this command needs a single channel family file")
        return obj

    return build


def _grid_or_single(args):
    grid = _parse_grid(getattr(args, "grid", None))
    if grid is None:
        return [(None, None)]
    name, values = grid
    return [(name, v) for v in values]


def _map_points(args, worker, points):
    threads = max(1, getattr(args, "threads", 1))
    if threads == 1 or len(points) <= 1:
        return [worker(pt) for pt in points]
    with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, points))


# ---------------------------------------------------------------------------
# bounds

def cmd_bounds(args) -> int:
    build = _load_channel(args, want_pair=True)
    points = _grid_or_single(args)

    def worker(point):
        name, value = point
        pair = build({name: value} if name else None)
        lower = (avwc_csr_lower_bound(pair, seed=args.seed) if args.csr
                 else avwc_lower_bound(pair, seed=args.seed))
        upper = avwc_upper_bound(pair, csr=args.csr, seed=args.seed)
        return (value, lower, upper)

    results = _map_points(args, worker, points)
    rows = []
    flags_seen = []
    for value, lower, upper in results:
        flags = ";".join(lower.flags + upper.flags)
        flags_seen.extend(lower.flags + upper.flags)
        rows.append([value if value is not None else "",
                     lower.value, upper.value,
                     lower.input_dist, lower.worst_q,
                     upper.worst_s if upper.worst_s is not None else "",
                     flags])
    _write_csv(args.out, args,
               ["param", "value_lower", "value_upper", "argmax_distribution",
                "worst_q", "worst_s", "flags"], rows)
    return EXIT_SOLVER if any(f.startswith("gap") for f in flags_seen) else EXIT_OK


# ---------------------------------------------------------------------------
# classify

def cmd_classify(args) -> int:
    build = _load_channel(args, want_pair=True)
    points = _grid_or_single(args)

    def worker(point):
        name, value = point
        pair = build({name: value} if name else None)
        verdict = (classify_less_noisy(pair, grid_resolution=args.resolution,
                                       seed=args.seed)
                   if args.order == "less-noisy"
                   else classify_degradation(pair, grid_resolution=args.resolution))
        return (value, verdict)

    results = _map_points(args, worker, points)
    rows = [[value if value is not None else "", args.order, v.grade,
             v.grid_resolution, "numerical" if v.numerically_supported else "exact"]
            for value, v in results]
    _write_csv(args.out, args, ["param", "order", "grade", "resolution", "support"],
               rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    build = _load_channel(args, want_pair=None)
    obj = build()
    family = obj.main if isinstance(obj, WiretapPair) else obj
    params = TypicalityParams(args.delta, args.eta, not args.absolute)
    p_x = Distribution.uniform(family.num_inputs)
    book = generate_codebook(p_x, args.n, args.codewords, seed=args.seed)
    decoder = CsrDecoder(book, family, params, nu2=args.nu2, seed=args.seed)
    result = worst_state_error(book, decoder, mode=args.jammer, metric="average",
                               restarts=args.restarts, budget=args.trials,
                               seed=args.seed)
    result_max = worst_state_error(book, decoder, mode=args.jammer, metric="max",
                                   restarts=args.restarts, budget=args.trials,
                                   seed=args.seed)
    from .channels import StateSequence
    table = decoder.table(StateSequence(np.array(result.state_seq), family.num_states))
    rows = [["worst_avg_error", "", result.value, _fmt(result.state_seq), result.mode],
            ["worst_max_error", "", result_max.value, _fmt(result_max.state_seq),
             result_max.mode]]
    for m, err in enumerate(table.message_errors()):
        rows.append(["message_error", m, err, _fmt(result.state_seq), result.mode])
    _write_csv(args.out, args, ["metric", "message", "value", "state_seq", "mode"],
               rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# partition

def cmd_partition(args) -> int:
    build = _load_channel(args, want_pair=True)
    pair = build()
    params = TypicalityParams(args.delta, args.eta, not args.absolute)
    report = secure_pipeline(pair, args.n, args.codewords, args.bins, params,
                             nu1=args.nu1, nu2=args.nu2, nu3=args.nu3,
                             seed=args.seed, num_codes=args.num_codes,
                             epsilon=args.epsilon, tau=args.tau,
                             check_rate=not args.no_rate_check)
    rows = []
    for k, code in enumerate(report.codes):
        for m, members in enumerate(code.partition.bins):
            rows.append(["bin", k, m, "|".join(str(i) for i in members), ""])
    for k, code in enumerate(report.codes):
        for si, srow in enumerate(report.state_seqs):
            rows.append(["leakage", k, _fmt(tuple(srow)), code.leakage_by_seq[si],
                         code.unpartitioned_by_seq[si]])
    rows.append(["worst_conditional_leakage", "", _fmt(report.worst_leakage_seq),
                 report.worst_conditional_leakage, report.worst_unpartitioned_leakage])
    rows.append(["worst_avg_error", "", "", report.worst_avg_error, ""])
    _write_csv(args.out, args, ["record", "code", "key", "value", "reference"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep

def cmd_sweep(args) -> int:
    if args.preset not in PRESETS:
        raise InputError(f"unknown preset {args.preset!r}")
    grid = _parse_grid(args.grid)
    if grid is None:
        raise InputError("sweep needs --grid")
    name, values = grid
    build = _load_channel(args, want_pair=True)

    if args.preset == "example-6.2":
        def worker(value):
            pair = build({name: value})
            csr = less_noisy_secrecy_capacity(pair, csr=True, seed=args.seed)
            avwc = less_noisy_secrecy_capacity(pair, csr=False, seed=args.seed)
            grade = classify_degradation(pair, grid_resolution=8).grade
            return [value, csr.value, avwc.value, grade,
                    ";".join(csr.flags + avwc.flags)]

        rows = _map_points(args, worker, values)
        _write_csv(args.out, args,
                   ["param", "csr_secrecy_capacity", "avwc_secrecy_capacity",
                    "degradation", "flags"], rows)
        return EXIT_OK

    def worker(value):
        pair = build({name: value})
        lower = (avwc_csr_lower_bound(pair, seed=args.seed) if args.csr
                 else avwc_lower_bound(pair, seed=args.seed))
        upper = avwc_upper_bound(pair, csr=args.csr, seed=args.seed)
        return [value, lower.value, upper.value, lower.input_dist, lower.worst_q,
                upper.worst_s, ";".join(lower.flags + upper.flags)]

    rows = _map_points(args, worker, values)
    _write_csv(args.out, args,
               ["param", "value_lower", "value_upper", "argmax_distribution",
                "worst_q", "worst_s", "flags"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avwc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"avwc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pair=True):
        p.add_argument("channel_file", nargs="?", help="channel or pair file")
        p.add_argument("--preset", choices=PRESETS)
        p.add_argument("--set", action="append", metavar="NAME=VALUE",
                       help="fix a file parameter")
        p.add_argument("--grid", metavar="NAME=START:STOP:STEP")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("bounds", help="achievability and converse secrecy bounds")
    common(p)
    p.add_argument("--csr", action="store_true",
                   help="receiver knows the state sequence")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("classify", help="degradation / less-noisy ordering")
    common(p)
    p.add_argument("--order", choices=["degradation", "less-noisy"],
                   default="degradation")
    p.add_argument("--resolution", type=int, default=16)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="codebook + state-aware decoder vs jammer")
    common(p)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--codewords", type=int, default=4)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--absolute", action="store_true",
                   help="absolute letter deviation instead of relative")
    p.add_argument("--nu2", type=float, default=0.2)
    p.add_argument("--trials", type=int, default=4000,
                   help="greedy jammer evaluation budget")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--jammer", choices=["exhaustive", "greedy", "auto"],
                   default="auto")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("partition", help="secure binning with exact leakage")
    common(p)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--codewords", type=int, default=32)
    p.add_argument("--bins", type=int, default=2)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--absolute", action="store_true")
    p.add_argument("--nu1", type=float, default=0.05)
    p.add_argument("--nu2", type=float, default=0.2)
    p.add_argument("--nu3", type=float, default=0.4)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--num-codes", type=int, default=1)
    p.add_argument("--no-rate-check", action="store_true")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("sweep", help="reproduce a bundled example as CSV curves")
    common(p)
    p.add_argument("--csr", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ChannelFileError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
