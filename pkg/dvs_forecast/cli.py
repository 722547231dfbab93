"""Command-line interface for the DVS forecasting pipeline."""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence, Tuple

from .compare import METHODS, NEURAL_METHODS, compare_methods, predictions_csv, prepare_split
from .config import load_config
from .errors import ConfigError, DVSError, ModelFormatError, ParseError
from .experiment import run_command
from .metrics import METRIC_NAMES, evaluate_metrics, format_table
from .series import SynthSpec, TimeSeries, load_series, make_windows, synth_series, write_series_csv
from .training import TrainedModel, build_stack, predict, train
from .visibility import (
    adjacency_to_csv,
    adjacency_to_json,
    dvs_compress,
    dvs_transform,
    enhanced_matrix,
    enhanced_to_csv,
    visibility_adjacency,
    zip_to_csv,
)

logger = logging.getLogger(__name__)


class CommandError(DVSError):
    """A command-level failure with a ready-to-print message."""


def _read_bytes(path: str) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except FileNotFoundError:
        raise CommandError(f"File '{path}' not found.") from None
    except OSError as e:
        raise CommandError(f"Error reading file '{path}': {e}") from None


def _decode(raw: bytes, path: str) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"'{path}' is not UTF-8 text (byte {e.start}: {e.reason})") from None


def _read_series(path: str) -> Tuple[TimeSeries, bytes]:
    raw = _read_bytes(path)
    return load_series(_decode(raw, path)), raw


def _read_model(path: str) -> TrainedModel:
    try:
        return TrainedModel.from_json(_decode(_read_bytes(path), path))
    except ModelFormatError as e:
        raise ModelFormatError(f"model file '{path}': {e}") from None


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise CommandError(f"Error writing to file '{path}': {e}") from None
    logger.info("wrote %s", path)


def _load_config(args):
    text = None
    if args.config:
        text = _decode(_read_bytes(args.config), args.config)
    config = load_config(text)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.drop_last:
        config = replace(config, data=replace(config.data, drop_last=True))
    return config


def _render_reports(rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{"method": name, **report.to_dict()} for name, report in rows], indent=2)
    if fmt == "csv":
        lines = ["method,n," + ",".join(METRIC_NAMES) + ",flags"]
        for name, report in rows:
            data = report.to_dict()
            cells = ["" if data[m] is None else f"{data[m]:.17g}" for m in METRIC_NAMES]
            lines.append(",".join([name, str(report.n)] + cells + [";".join(report.flags)]))
        return "\n".join(lines)
    return format_table(rows)


def cmd_transform(args) -> int:
    config = _load_config(args)
    series, raw = _read_series(args.series)
    out = Path(args.out or ".")
    zip_path = out / "zip.csv"

    def body(config, run):
        abscissa = series.times if args.abscissa == "time" else None
        adjacency = visibility_adjacency(series.values, abscissa)
        enhanced = enhanced_matrix(adjacency, series.values)
        if args.format == "csv":
            _write_text(out / "adjacency.csv", adjacency_to_csv(adjacency))
        else:
            _write_text(out / "adjacency.json", adjacency_to_json(adjacency) + "\n")
        _write_text(out / "evg.csv", enhanced_to_csv(enhanced))
        _write_text(zip_path, zip_to_csv(dvs_compress(enhanced)))

        if args.window:
            windows = make_windows(series, args.window, drop_last=config.data.drop_last)
            _write_text(out / "windows.json", windows.to_json() + "\n")
            lines = ["window,index,zip"]
            for k, row in enumerate(windows.inputs):
                lines.extend(f"{k},{i},{value:.17g}" for i, value in enumerate(dvs_transform(row).z))
            _write_text(out / "zip_windows.csv", "\n".join(lines) + "\n")

    run_command("transform", body, config, args.argv, output=zip_path, input_bytes=raw)
    return 0


def cmd_train(args) -> int:
    config = _load_config(args)
    series, raw = _read_series(args.series)
    model_path = Path(args.out or "model.json")

    def body(config, run):
        train_set, _ = prepare_split(series, config.data)
        stack = build_stack(config.train.architecture, config.data.window_len)
        report = train(stack, train_set, config.train)
        _write_text(model_path, report.model.to_json() + "\n")
        report_path = model_path.with_name(model_path.stem + ".report.json")
        _write_text(report_path, json.dumps(report.to_dict(str(model_path)), indent=2) + "\n")
        return {"final_loss": report.losses[-1]}

    run_command("train", body, config, args.argv, output=model_path, input_bytes=raw)
    return 0


def cmd_predict(args) -> int:
    config = _load_config(args)
    model = _read_model(args.model)
    series, raw = _read_series(args.series)
    out = Path(args.out or "predictions.csv")

    def body(config, run):
        data = replace(config.data, window_len=model.stack.input_len)
        if args.all:
            windows = make_windows(series, data.window_len, drop_last=data.drop_last)
        else:
            _, windows = prepare_split(series, data)
        preds = predict(model, windows)
        _write_text(out, predictions_csv(windows, preds))
        label = next(name for name, key in NEURAL_METHODS.items() if key == (model.architecture, model.use_dvs))
        print(_render_reports([(label, evaluate_metrics(preds, windows.targets))], args.format))

    seed = config.train.seed if model.seed is None else model.seed
    run_command("predict", body, config, args.argv, output=out, input_bytes=raw, seed=seed)
    return 0


def cmd_compare(args) -> int:
    config = _load_config(args)
    series, raw = _read_series(args.series)
    seeds = args.seeds or [config.train.seed]
    out = Path(args.out or "comparison")
    summary = out / "comparison.json"

    def body(config, run):
        results, test_set = compare_methods(series, config, args.methods, seeds)
        for result in results:
            _write_text(out / f"predictions_{result.method}.csv", predictions_csv(test_set, result.predictions))
        payload = {"seeds": list(seeds), "test_windows": len(test_set), "methods": [r.to_dict() for r in results]}
        _write_text(summary, json.dumps(payload, indent=2) + "\n")

        print(_render_reports([(r.method, r.report) for r in results], args.format))
        if args.format == "text" and len(seeds) > 1:
            for result in results:
                if result.per_seed:
                    print(f"\n{result.method} per seed")
                    print(format_table([(f"seed {seed}", report) for seed, report in result.per_seed]))

    run_command("compare", body, config, args.argv, output=summary, input_bytes=raw, seed=seeds[0])
    return 0


def cmd_synth(args) -> int:
    config = _load_config(args)
    spec = SynthSpec(
        length=args.length,
        trend_slope=args.trend_slope,
        seasonal_amplitude=args.seasonal_amplitude,
        seasonal_period=args.seasonal_period,
        noise_sigma=args.noise_sigma,
        base_level=args.base_level,
        seed=7 if args.seed is None else args.seed,
    )
    if args.config:
        problems = spec.validate(window_len=config.data.window_len)
        if problems:
            raise ConfigError(problems)
    out = Path(args.out) if args.out else None

    def body(config, run):
        text = write_series_csv(synth_series(spec))
        if out is None:
            sys.stdout.write(text)
        else:
            _write_text(out, text)

    run_command("synth", body, config, args.argv, output=out, seed=spec.seed)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Seed for every random draw (overrides the config)")
    common.add_argument("--config", help="Experiment configuration JSON")
    common.add_argument("--out", help="Output file or directory")
    common.add_argument("--format", choices=["json", "csv", "text"], default="text", help="Report format")
    common.add_argument("--drop-last", action="store_true", help="Drop the final window (n - w - 1 windows)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable)")
    common.add_argument("-q", "--quiet", action="store_true", help="Only log errors")

    parser = argparse.ArgumentParser(
        description="Deep Visibility Series forecasting: visibility graphs, DVS compression and small CNN forecasters."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    transform = commands.add_parser("transform", parents=[common], help="Write adjacency, EVG matrix and zip series")
    transform.add_argument("series", help="Input series CSV (header t,value)")
    transform.add_argument("--window", type=int, help="Also write the windows (windows.json) and their zip series for this window length")
    transform.add_argument(
        "--abscissa", choices=["index", "time"], default="index", help="Node positions: integer index or timestamps"
    )
    transform.set_defaults(handler=cmd_transform)

    train_cmd = commands.add_parser("train", parents=[common], help="Train a forecaster on the training split")
    train_cmd.add_argument("series", help="Input series CSV")
    train_cmd.set_defaults(handler=cmd_train)

    predict_cmd = commands.add_parser("predict", parents=[common], help="Predict the test split with a saved model")
    predict_cmd.add_argument("model", help="Model JSON written by 'train'")
    predict_cmd.add_argument("series", help="Input series CSV")
    predict_cmd.add_argument("--all", action="store_true", help="Predict every window, not just the test split")
    predict_cmd.set_defaults(handler=cmd_predict)

    compare = commands.add_parser("compare", parents=[common], help="Compare methods on one chronological split")
    compare.add_argument("series", help="Input series CSV")
    compare.add_argument("--methods", nargs="+", default=list(METHODS), help=f"Any of: {', '.join(METHODS)}")
    compare.add_argument("--seeds", nargs="+", type=int, help="Seeds for the neural methods")
    compare.set_defaults(handler=cmd_compare)

    synth = commands.add_parser("synth", parents=[common], help="Generate a synthetic trend + season series")
    defaults = SynthSpec()
    synth.add_argument("--length", type=int, default=defaults.length)
    synth.add_argument("--trend-slope", type=float, default=defaults.trend_slope)
    synth.add_argument("--seasonal-amplitude", type=float, default=defaults.seasonal_amplitude)
    synth.add_argument("--seasonal-period", type=float, default=defaults.seasonal_period)
    synth.add_argument("--noise-sigma", type=float, default=defaults.noise_sigma)
    synth.add_argument("--base-level", type=float, default=defaults.base_level)
    synth.set_defaults(handler=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the CLI."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.argv = ["dvs-forecast"] + argv

    level = logging.ERROR if args.quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        return args.handler(args)
    except DVSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
