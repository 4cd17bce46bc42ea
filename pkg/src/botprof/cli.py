"""``botprof`` command line: simulate, profile, compare, grade, validate.

Exit status is 0 on success, 1 on a domain or runtime failure and 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .compare import (
    GradeConfig,
    ProfileMismatchError,
    compare_profiles,
    default_reference_profile,
    final_grade,
    load_reference_profile,
)
from .metrics import compute_metrics
from .network import CPNetwork, NetworkConfigError, default_network, load_network, run_session
from .report import (
    BehaviorProfile,
    ReportError,
    default_templates,
    generate_profile,
    load_templates,
    profile_from_dict,
    sigmas_from_dict,
)
from .sim import POLICIES, SimulationParams, default_scenario, simulate
from .trace import MAGIC, TraceError, TraceValidationError, parse_trace, write_trace

NETWORK_ENV = "BOTPROF_NETWORK"


class CLIError(Exception):
    """Domain failure reported to the user with exit status 1."""


class _UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text, encoding="utf-8")


def _network(path: str | None) -> CPNetwork:
    path = path or os.environ.get(NETWORK_ENV)
    if not path:
        return default_network()
    return load_network(_read(path))


def _templates(path: str | None):
    return load_templates(_read(path)) if path else default_templates()


def _profile_from_text(text: str, args: argparse.Namespace, origin: str) -> BehaviorProfile:
    """A profile from a trace, a profile JSON or a ΣCP fixture."""
    if text.lstrip().startswith(MAGIC):
        trace = parse_trace(text)
        sigmas = run_session(_network(args.network), compute_metrics(trace))
        return generate_profile(sigmas, trace.subject_id, _templates(args.templates))
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        raise CLIError(f"{origin}: neither a trace nor JSON") from None
    cps = data.get("cps") if isinstance(data, dict) else None
    if isinstance(cps, dict) and cps and all(isinstance(v, dict) and "percentages" not in v for v in cps.values()):
        sigmas = sigmas_from_dict(data)
        return generate_profile(sigmas, data.get("subject_id", ""), _templates(args.templates), data.get("notes", ()))
    return profile_from_dict(data)


# -- subcommands -----------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = default_scenario(args.seed, args.width, args.height, args.obstacles)
    params = SimulationParams(
        scenario=scenario,
        seed=args.seed,
        ticks=args.ticks,
        policy=args.policy,
        energy_start=args.energy_start,
        subject_id=args.subject,
    )
    trace = simulate(params)
    _write(args.out, write_trace(trace))
    captured = sum(t.reward_captured for t in trace.ticks)
    summary = (
        f"ticks={len(trace.ticks)} rewards_captured={captured} "
        f"final_energy={trace.ticks[-1].player_energy:g}\n"
    )
    (sys.stderr if args.out == "-" else sys.stdout).write(summary)
    return 0


def cmd_profile(args: argparse.Namespace) -> int:
    if args.sigma_fixture:
        text, origin = _read(args.sigma_fixture), args.sigma_fixture
    else:
        text, origin = _read(args.input), args.input
    profile = _profile_from_text(text, args, origin)
    if args.subject:
        profile = BehaviorProfile(args.subject, profile.cps, profile.stats, profile.notes)
    _write(args.out, profile.render(args.format))
    return 0


def _reference(args: argparse.Namespace) -> BehaviorProfile:
    if args.reference:
        return load_reference_profile(_read(args.reference))
    return default_reference_profile()


def cmd_compare(args: argparse.Namespace) -> int:
    a = _profile_from_text(_read(args.first), args, args.first)
    b = _profile_from_text(_read(args.second), args, args.second)
    breakdown = compare_profiles(a, b)
    if args.format == "json":
        text = json.dumps(breakdown.to_dict(), indent=2) + "\n"
    else:
        text = "".join(f"{name:<10} {breakdown.similarity[name]:.4f}\n" for name in breakdown.similarity)
    _write(args.out, text)
    return 0


def _grade_one(path: Path, args: argparse.Namespace, reference: BehaviorProfile, cfg: GradeConfig):
    try:
        bot = _profile_from_text(path.read_text(encoding="utf-8"), args, str(path))
        return path, final_grade(reference, bot, cfg), None
    except (CLIError, TraceError, ReportError, ProfileMismatchError, NetworkConfigError, OSError) as exc:
        return path, None, str(exc)


def cmd_grade(args: argparse.Namespace) -> int:
    reference = _reference(args)
    cfg = GradeConfig(g_min=args.g_min)
    if args.batch:
        return _grade_batch(args, reference, cfg)
    source = args.input or "-"
    bot = _profile_from_text(_read(source), args, source)
    grade = final_grade(reference, bot, cfg)
    _write(args.out, grade.to_json() if args.format == "json" else grade.to_text())
    return 0


def _grade_batch(args: argparse.Namespace, reference: BehaviorProfile, cfg: GradeConfig) -> int:
    root = Path(args.batch)
    if not root.is_dir():
        raise CLIError(f"{root} is not a directory")
    files = sorted(p for p in root.iterdir() if p.is_file())
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor() as pool:
        results = list(pool.map(lambda p: _grade_one(p, args, reference, cfg), files))
    failed = False
    lines = [f"{'file':<32} {'grade':>6} {'raw':>8}"]
    for path, grade, error in results:
        if grade is None:
            failed = True
            lines.append(f"{path.name:<32} {'error':>6}  {error}")
            continue
        lines.append(f"{path.name:<32} {grade.rounded:>6.1f} {grade.fg:>8.4f}")
        if out_dir:
            (out_dir / f"{path.name}.grade.json").write_text(grade.to_json(), encoding="utf-8")
    sys.stdout.write("\n".join(lines) + "\n")
    return 1 if failed else 0


def cmd_validate(args: argparse.Namespace) -> int:
    if not args.trace and not args.network:
        raise _UsageError("validate needs --trace and/or --network")
    problems: list[str] = []
    if args.network:
        try:
            load_network(_read(args.network))
        except NetworkConfigError as exc:
            problems.append(f"network: {exc}")
    if args.trace:
        try:
            parse_trace(_read(args.trace))
        except TraceValidationError as exc:
            problems += [f"trace: {v}" for v in exc.violations]
        except TraceError as exc:
            problems.append(f"trace: {exc}")
    if problems:
        sys.stdout.write("\n".join(problems) + "\n")
        return 1
    sys.stdout.write("OK\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="botprof", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def network_opts(p: argparse.ArgumentParser) -> None:
        p.add_argument("--network", help=f"network config JSON (default: built in, or ${NETWORK_ENV})")
        p.add_argument("--templates", help="sentence template JSON (default: built in)")

    p = sub.add_parser("simulate", help="generate a trace with the grid-world simulator")
    p.add_argument("--policy", choices=POLICIES, default="greedy")
    p.add_argument("--ticks", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=38)
    p.add_argument("--height", type=int, default=38)
    p.add_argument("--obstacles", type=int, default=20, help="number of seeded obstacles")
    p.add_argument("--energy-start", type=float, default=20)
    p.add_argument("--subject", help="subject id written to the trace")
    p.add_argument("--out", required=True, help="output trace path, '-' for stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("profile", help="build a behavior-profile report")
    p.add_argument("input", nargs="?", default="-", help="trace, profile or ΣCP JSON ('-' = stdin)")
    p.add_argument("--sigma-fixture", help="ΣCP fixture JSON used instead of a trace")
    p.add_argument("--format", choices=("text", "markdown", "json"), default="json")
    p.add_argument("--subject", help="override the subject id")
    p.add_argument("--out", help="output path (default stdout)")
    network_opts(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("compare", help="per-CP similarity of two profiles")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--format", choices=("text", "json"), default="json")
    p.add_argument("--out")
    network_opts(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("grade", help="grade a bot against the reference profile")
    p.add_argument("input", nargs="?", help="trace, profile or ΣCP JSON ('-' = stdin)")
    p.add_argument("--reference", help="reference profile JSON (default: built-in human expert)")
    p.add_argument("--batch", help="grade every file in a directory")
    p.add_argument("--g-min", type=float, default=1.0)
    p.add_argument("--format", choices=("text", "json"), default="json")
    p.add_argument("--out", help="output path; with --batch, a directory for per-file grades")
    network_opts(p)
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("validate", help="check a trace and/or a network config")
    p.add_argument("--trace")
    p.add_argument("--network")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"botprof: error: {exc}\n")
        return 2
    except TraceValidationError as exc:
        sys.stderr.write("invalid trace:\n" + "".join(f"  {v}\n" for v in exc.violations))
        return 1
    except (CLIError, TraceError, ReportError, ProfileMismatchError, NetworkConfigError, ValueError) as exc:
        sys.stderr.write(f"botprof: {exc}\n")
        return 1
    except BrokenPipeError:
        # Downstream closed early; silence the flush at interpreter exit.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
