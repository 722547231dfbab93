"""Seeded experiment runs recorded with sacred.

Every CLI command runs as one sacred experiment. The validated
`ExperimentConfig` is the sacred configuration, checked again by a config
hook after sacred merges it, and `train.seed` is the sacred seed. When a
command writes files, a `FileStorageObserver` records the run next to its
main output::

    <output>.manifest/<run id>/config.json   effective configuration + seed
    <output>.manifest/<run id>/run.json      argv, input digest, config hash,
                                             version, start/stop time, status

`RunManifest.load` reads such a directory back.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from sacred import Experiment
from sacred.observers import FileStorageObserver

from .checks import is_int
from .config import ExperimentConfig
from .errors import ConfigError, ManifestError

logger = logging.getLogger(__name__)

EXPERIMENT_NAME = "dvs_forecast"
SEED_KEY = "seed"


def input_digest(data: bytes) -> str:
    """SHA-256 of file bytes with CRLF normalized to LF."""
    return hashlib.sha256(data.replace(b"\r\n", b"\n")).hexdigest()


def manifest_dir(output: Path) -> Path:
    return output.with_name(output.name + ".manifest")


def _plain(value: Any) -> Any:
    """Builtin copy of a (read-only) sacred config value."""
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def config_from_sacred(config: Dict[str, Any]) -> ExperimentConfig:
    sections = {key: value for key, value in _plain(config).items() if key != SEED_KEY}
    return ExperimentConfig.from_dict(sections)


def check_config(config, command_name, logger):
    """Config hook: the merged configuration must validate as a whole."""
    problems: List[str] = []
    try:
        config_from_sacred(config)
    except ConfigError as exc:
        problems.extend(exc.problems)
    seed = config.get(SEED_KEY)
    if seed is not None and not is_int(seed):
        problems.append(f"{SEED_KEY}: must be an integer, got {seed!r}")
    if problems:
        raise ConfigError(problems)
    return {}


def run_command(
    command: str,
    body: Callable[[ExperimentConfig, Any], Any],
    config: ExperimentConfig,
    argv: Sequence[str],
    output: Optional[Path] = None,
    input_bytes: Optional[bytes] = None,
    seed: Optional[int] = None,
) -> Any:
    """Run `body(config, run)` as a sacred experiment and return its result.

    `seed` defaults to `config.train.seed`. Without `output` nothing is
    recorded on disk.
    """
    from . import __version__

    ex = Experiment(EXPERIMENT_NAME, save_git_info=False)
    ex.logger = logger
    ex.add_config(ExperimentConfig().to_dict())
    ex.config_hook(check_config)
    if output is not None:
        ex.observers.append(FileStorageObserver(str(manifest_dir(output))))

    @ex.main
    def run_body(_config, _run):
        return body(config_from_sacred(_config), _run)

    updates = config.to_dict()
    updates[SEED_KEY] = config.train.seed if seed is None else seed
    meta = {
        "cli_command": command,
        "argv": list(argv),
        "config_hash": config.config_hash(),
        "input_digest": None if input_bytes is None else input_digest(input_bytes),
        "tool_version": __version__,
    }
    run = ex.run(config_updates=updates, meta_info=meta, options={"--capture": "no"})
    if output is not None:
        logger.info("recorded run %s in %s", run._id, manifest_dir(output))
    return run.result


@dataclass(frozen=True)
class RunManifest:
    """One recorded run: enough to repeat the command exactly."""

    command: List[str]
    config: ExperimentConfig
    seed: int
    config_hash: str
    input_digest: Optional[str]
    tool_version: str
    status: str
    started_at: str
    finished_at: Optional[str]

    @classmethod
    def load(cls, run_dir: Path) -> "RunManifest":
        try:
            run = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
            stored = json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
            meta = run["meta"]
            return cls(
                command=list(meta["argv"]),
                config=config_from_sacred(stored),
                seed=stored[SEED_KEY],
                config_hash=meta["config_hash"],
                input_digest=meta["input_digest"],
                tool_version=meta["tool_version"],
                status=run["status"],
                started_at=run["start_time"],
                finished_at=run.get("stop_time"),
            )
        except (OSError, ValueError, KeyError) as exc:
            raise ManifestError(f"cannot read run record in '{run_dir}': {exc}") from exc

    @classmethod
    def latest(cls, output: Path) -> "RunManifest":
        """The most recent run recorded for `output`."""
        base = manifest_dir(output)
        runs = [p for p in base.iterdir() if p.name.isdigit()] if base.is_dir() else []
        if not runs:
            raise ManifestError(f"no recorded runs in '{base}'")
        return cls.load(max(runs, key=lambda p: int(p.name)))
