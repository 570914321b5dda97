"""Command-line entry point: ``dualent <subcommand> ...``.

Exit codes: 0 success, 2 usage or configuration error, 3 domain error.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bell import ChshSettings, MeasurementSetting, chsh, optimize_chsh
from .dualism import dualism_magnitude_check
from .errors import ConfigError, DualentError
from .experiment import CSV_HEADER, ExperimentConfig, maximal_settings, run_experiment
from .fock import DualPairState, Statistics, VariablePair, make_state
from .identicity import (
    TemperatureQuery,
    degraded_dual_state,
    smax_vs_distances,
    smax_vs_overlap,
    temperature_threshold,
)
from .output import RunManifest, render_csv, render_json, write_text

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3

_REAL = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_UNSIGNED = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_PATTERNS = (
    (re.compile(rf"^({_REAL})$"), lambda m: complex(float(m[1]), 0.0)),
    (re.compile(rf"^({_REAL})i$"), lambda m: complex(0.0, float(m[1]))),
    (re.compile(rf"^({_REAL})([+-]{_UNSIGNED})i$"), lambda m: complex(float(m[1]), float(m[2]))),
)


def parse_complex(text: str) -> complex:
    """Parse ``a``, ``bi``, ``a+bi`` or ``a-bi`` with decimal reals."""
    s = str(text).strip()
    for pattern, build in _COMPLEX_PATTERNS:
        m = pattern.match(s)
        if m:
            return build(m)
    raise argparse.ArgumentTypeError(f"cannot parse complex amplitude {text!r} (use a, bi, a+bi or a-bi)")


def format_complex(z: complex, digits: int = 4) -> str:
    re_part = f"{z.real:.{digits}f}"
    if z.imag == 0:
        return re_part
    sign = "+" if z.imag >= 0 else "-"
    return f"{re_part}{sign}{abs(z.imag):.{digits}f}i"


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` (stop included), a comma list, or a single number."""
    s = str(text).strip()
    try:
        if ":" in s:
            parts = s.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, step = (float(p) for p in parts)
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        values = [float(p) for p in s.split(",") if p.strip() != ""]
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed range {text!r} (use start:stop:step or a,b,c)") from None


def parse_variable(text: str) -> VariablePair:
    """``name:label1,label2``."""
    try:
        name, labels = str(text).split(":", 1)
        l1, l2 = labels.split(",")
        return VariablePair(name.strip(), (l1.strip(), l2.strip()))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed variable {text!r} (use name:label1,label2)") from None


def parse_setting(text: str) -> MeasurementSetting:
    try:
        theta, phi = (float(p) for p in str(text).split(","))
        return MeasurementSetting(theta, phi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad setting {text!r}: use theta,phi in radians ({exc})") from None


def parse_statistics(text: str) -> Statistics:
    try:
        return Statistics.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _describe(state: DualPairState) -> str:
    return (
        f"alpha={format_complex(state.alpha)} beta={format_complex(state.beta)} "
        f"label={state.label_var.name}{list(state.label_var.eigenlabels)} "
        f"entangled={state.entangled_var.name}{list(state.entangled_var.eigenlabels)} "
        f"statistics={state.statistics.value}"
    )


def _settings_json(s: ChshSettings) -> dict:
    return {name: {"theta": getattr(s, key).theta, "phi": getattr(s, key).phi}
            for name, key in (("a", "a"), ("aPrime", "a_prime"), ("b", "b"), ("bPrime", "b_prime"))}


def _emit(args, name: str, manifest: RunManifest, *, csv=None, payload=None, echo_csv: bool = False) -> None:
    """Write ``name.csv`` / ``name.json`` to --out-dir according to --format."""
    csv_text = render_csv(manifest, *csv) if csv is not None else None
    if echo_csv and csv_text is not None:
        sys.stdout.write(csv_text)
    if args.out_dir is None:
        return
    out = Path(args.out_dir)
    if csv_text is not None and args.format in ("csv", "both"):
        write_text(out / f"{name}.csv", csv_text)
    if payload is not None and args.format in ("json", "both"):
        write_text(out / f"{name}.json", render_json(manifest, payload))


# ---------------------------------------------------------------- dual


def cmd_dual(args) -> int:
    state = make_state(args.alpha, args.beta, args.label_var, args.entangled_var, args.stat)
    report = dualism_magnitude_check(state)
    print(f"original: {_describe(report.original)}")
    print(f"dual:     {_describe(report.dual)}")
    print(f"concurrence original: {report.concurrence_original:.4f}")
    print(f"concurrence dual:     {report.concurrence_dual:.4f}")
    print(f"factorizable: {str(report.factorizable).lower()}")
    manifest = RunManifest(
        "dual",
        {
            "alpha": args.alpha_text,
            "beta": args.beta_text,
            "stat": args.stat.value,
            "labelVar": _var_text(args.label_var),
            "entangledVar": _var_text(args.entangled_var),
        },
        args.seed,
    )
    payload = {
        "original": _state_json(report.original),
        "dual": _state_json(report.dual),
        "concurrenceOriginal": report.concurrence_original,
        "concurrenceDual": report.concurrence_dual,
        "factorizable": report.factorizable,
    }
    _emit(args, "dual", manifest, payload=payload)
    return EXIT_OK


def _var_text(v: VariablePair) -> str:
    return f"{v.name}:{v.eigenlabels[0]},{v.eigenlabels[1]}"


def _state_json(state: DualPairState) -> dict:
    return {
        "alpha": [state.alpha.real, state.alpha.imag],
        "beta": [state.beta.real, state.beta.imag],
        "labelVar": _var_text(state.label_var),
        "entangledVar": _var_text(state.entangled_var),
        "statistics": state.statistics.value,
    }


# ---------------------------------------------------------------- chsh


def cmd_chsh(args) -> int:
    if args.state == "maximal":
        alpha_text, beta_text = "1", "1"
    else:
        alpha_text, beta_text = args.alpha_text, args.beta_text
    state = make_state(parse_complex(alpha_text), parse_complex(beta_text), _MOMENTUM, _POLARIZATION, args.stat)
    rho = degraded_dual_state(state, args.overlap)
    if args.optimize:
        best = optimize_chsh(rho)
        s_value, settings = best.s_max, best.settings
    else:
        settings = _settings_from_args(args)
        s_value = chsh(rho, settings)
    print(f"S = {s_value:.6f}")
    for name, key in (("a", "a"), ("a'", "a_prime"), ("b", "b"), ("b'", "b_prime")):
        m = getattr(settings, key)
        print(f"  {name:2s} theta={m.theta:.6f} phi={m.phi:.6f}")
    manifest = RunManifest(
        "chsh",
        {
            "state": args.state,
            "alpha": alpha_text,
            "beta": beta_text,
            "stat": args.stat.value,
            "overlap": args.overlap,
            "optimize": args.optimize,
            **{
                flag: f"{m.theta!r},{m.phi!r}"
                for flag, m in (("a", args.a), ("a-prime", args.a_prime), ("b", args.b), ("b-prime", args.b_prime))
                if m is not None
            },
        },
        args.seed,
    )
    _emit(args, "chsh", manifest, payload={"s": s_value, "settings": _settings_json(settings)})
    return EXIT_OK


_MOMENTUM = VariablePair("momentum", ("-k", "k"))
_POLARIZATION = VariablePair("polarization", ("H", "V"))


def _settings_from_args(args) -> ChshSettings:
    default = maximal_settings()
    return ChshSettings(
        args.a or default.a, args.a_prime or default.a_prime, args.b or default.b, args.b_prime or default.b_prime
    )


# ---------------------------------------------------------------- simulate

SIMULATE_KEYS = ("alpha", "beta", "stat", "pairs", "overlap", "efficiency", "settings", "a", "a-prime", "b", "b-prime")
SIMULATE_DEFAULTS = {
    "alpha": "1",
    "beta": "1",
    "stat": "boson",
    "pairs": "1000000",
    "overlap": "1",
    "efficiency": "1",
    "settings": "maximal",
}


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment. Keys accept - or _."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("_", "-")
        if key == "seed":
            values[key] = value
            continue
        if key not in SIMULATE_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def resolve_simulate(args) -> tuple[dict[str, str], int]:
    params = dict(SIMULATE_DEFAULTS)
    seed = None
    if args.config:
        try:
            file_values = read_config_file(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        seed = file_values.pop("seed", None)
        params.update(file_values)
    for key in SIMULATE_KEYS:
        value = getattr(args, key.replace("-", "_") + "_flag", None)
        if value is not None:
            params[key] = str(value)
    if args.seed_given:
        seed = args.seed
    try:
        seed = int(seed) if seed is not None else args.seed
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {seed!r}") from None
    return params, seed


def build_experiment(params: dict[str, str], seed: int) -> ExperimentConfig:
    try:
        alpha = parse_complex(params["alpha"])
        beta = parse_complex(params["beta"])
        stat = Statistics.parse(params["stat"])
        pairs = int(params["pairs"])
        overlap = float(params["overlap"])
        efficiency = float(params["efficiency"])
    except (argparse.ArgumentTypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    state = make_state(alpha, beta, _MOMENTUM, _POLARIZATION, stat)
    mode = params.get("settings", "maximal")
    if mode == "maximal":
        settings = maximal_settings()
    elif mode == "optimal":
        settings = optimize_chsh(degraded_dual_state(state, overlap)).settings
    else:
        raise ConfigError(f"settings must be 'maximal' or 'optimal', got {mode!r}")
    overrides = {}
    for key, field_name in (("a", "a"), ("a-prime", "a_prime"), ("b", "b"), ("b-prime", "b_prime")):
        if key in params:
            try:
                overrides[field_name] = parse_setting(params[key])
            except argparse.ArgumentTypeError as exc:
                raise ConfigError(str(exc)) from None
    if overrides:
        base = {"a": settings.a, "a_prime": settings.a_prime, "b": settings.b, "b_prime": settings.b_prime}
        base.update(overrides)
        settings = ChshSettings(**base)
    return ExperimentConfig(
        state=state,
        settings=settings,
        n_pairs_per_setting_pair=pairs,
        seed=seed,
        overlap_v=overlap,
        detector_efficiency=efficiency,
    )


def cmd_simulate(args) -> int:
    params, seed = resolve_simulate(args)
    config = build_experiment(params, seed)
    result = run_experiment(config)
    manifest = RunManifest("simulate", params, seed)
    out = Path(args.out_dir if args.out_dir is not None else ".")
    if args.format in ("json", "both"):
        payload = {"result": result.to_json(), "settings": _settings_json(config.settings)}
        write_text(out / "result.json", render_json(manifest, payload))
    if args.format in ("csv", "both"):
        write_text(out / "counts.csv", render_csv(manifest, CSV_HEADER, result.csv_rows()))
    print(f"S = {result.s_hat:.6f} +/- {result.s_std_err:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------- sweeps


def cmd_identicity_sweep(args) -> int:
    rows = smax_vs_overlap(args.v)
    manifest = RunManifest("identicity-sweep", {"v": args.v_text}, args.seed)
    _emit(
        args,
        "identicity_sweep",
        manifest,
        csv=(["v", "sMax"], rows),
        payload={"rows": [{"v": v, "sMax": s} for v, s in rows]},
        echo_csv=True,
    )
    return EXIT_OK


def cmd_decohere(args) -> int:
    rows = smax_vs_distances(args.gamma_id, args.gamma_path, args.speed, args.d1, args.d2)
    manifest = RunManifest(
        "decohere",
        {
            "gammaId": args.gamma_id,
            "gammaPath": args.gamma_path,
            "speed": args.speed,
            "d1": args.d1_text,
            "d2": args.d2_text,
        },
        args.seed,
    )
    _emit(
        args,
        "decohere",
        manifest,
        csv=(["d1", "d2", "sMax"], rows),
        payload={"rows": [{"d1": a, "d2": b, "sMax": s} for a, b, s in rows]},
        echo_csv=True,
    )
    return EXIT_OK


def cmd_temperature(args) -> int:
    theta = temperature_threshold(TemperatureQuery(args.mass_number, args.dx))
    print(f"theta = {theta:.6e} K")
    manifest = RunManifest("temperature", {"massNumber": args.mass_number, "dx": args.dx}, args.seed)
    _emit(
        args,
        "temperature",
        manifest,
        csv=(["massNumber", "dx", "thetaKelvin"], [[args.mass_number, args.dx, theta]]),
        payload={"thetaKelvin": theta},
    )
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Text(argparse.Action):
    """Store the parsed value and keep the raw text as ``<dest>_text``."""

    def __call__(self, parser, namespace, values, option_string=None):
        try:
            setattr(namespace, self.dest, self.type_fn(values))
        except argparse.ArgumentTypeError as exc:
            raise argparse.ArgumentError(self, str(exc)) from None
        setattr(namespace, self.dest + "_text", values)


def _text_action(type_fn):
    return type("TextAction", (_Text,), {"type_fn": staticmethod(type_fn)})


def _positive(kind):
    def convert(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return value

    return convert


def _non_negative(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text!r}")
    return value


class _SeedAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        namespace.seed = values
        namespace.seed_given = True


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=_seed, action=_SeedAction, default=default(42), help="RNG seed (default 42)")
    p.add_argument("--out-dir", default=default(None), help="directory for output files")
    p.add_argument(
        "--format", choices=("csv", "json", "both"), default=default("both"), help="which output files to write"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dualent {__version__}")
    _add_global(parser, suppress=False)
    parser.set_defaults(seed_given=False)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        _add_global(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    p = add("dual", cmd_dual, "print a state, its dual and their concurrences")
    p.add_argument("--alpha", action=_text_action(parse_complex), default=1 + 0j)
    p.add_argument("--beta", action=_text_action(parse_complex), default=1 + 0j)
    p.add_argument("--stat", type=parse_statistics, default=Statistics.BOSON)
    p.add_argument("--label-var", type=parse_variable, default=_MOMENTUM, help="name:label1,label2")
    p.add_argument("--entangled-var", type=parse_variable, default=_POLARIZATION, help="name:label1,label2")
    p.set_defaults(alpha_text="1", beta_text="1")

    p = add("chsh", cmd_chsh, "evaluate or optimize CHSH on a routed dual state")
    p.add_argument("--state", choices=("maximal", "custom"), default="maximal")
    p.add_argument("--alpha", action=_text_action(parse_complex), help="used with --state custom")
    p.add_argument("--beta", action=_text_action(parse_complex), help="used with --state custom")
    p.add_argument("--stat", type=parse_statistics, default=Statistics.BOSON)
    p.set_defaults(alpha_text="1", beta_text="1")
    p.add_argument("--overlap", type=float, default=1.0, help="internal-tag overlap v in [0, 1]")
    p.add_argument("--optimize", action="store_true")
    for flag in ("a", "a-prime", "b", "b-prime"):
        p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=parse_setting, help="theta,phi in radians")

    p = add("simulate", cmd_simulate, "Monte Carlo run of the momentum Bell test")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--alpha", dest="alpha_flag")
    p.add_argument("--beta", dest="beta_flag")
    p.add_argument("--stat", dest="stat_flag")
    p.add_argument("--pairs", "-n", dest="pairs_flag", help="pairs per setting pair")
    p.add_argument("--overlap", dest="overlap_flag")
    p.add_argument("--efficiency", dest="efficiency_flag")
    p.add_argument("--settings", dest="settings_flag", choices=("maximal", "optimal"))
    for flag in ("a", "a-prime", "b", "b-prime"):
        p.add_argument(f"--{flag}", dest=flag.replace("-", "_") + "_flag", help="theta,phi in radians")

    p = add("identicity-sweep", cmd_identicity_sweep, "sMax against internal-tag overlap v")
    p.add_argument("--v", action=_text_action(parse_range), required=True, help="start:stop:step or list")

    p = add("decohere", cmd_decohere, "sMax over a (d1, d2) grid of the two dephasing channels")
    p.add_argument("--gamma-id", type=_non_negative, default=0.0, help="identicity-loss rate, 1/s")
    p.add_argument("--gamma-path", type=_non_negative, default=0.0, help="path dephasing rate, 1/s")
    p.add_argument("--speed", type=_positive(float), default=1.0, help="transport speed, m/s")
    p.add_argument("--d1", action=_text_action(parse_range), required=True)
    p.add_argument("--d2", action=_text_action(parse_range), required=True)

    p = add("temperature", cmd_temperature, "trap temperature below which arrival times reveal nothing")
    p.add_argument("--mass-number", type=_positive(float), required=True)
    p.add_argument("--dx", type=_positive(float), required=True, help="position spread, m")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DualentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
