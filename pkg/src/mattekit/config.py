"""Run configuration: INI file with a ``[run]`` section plus one section per subcommand.

Keys are the long flag names (dashes or underscores). Precedence is
built-in defaults < config file < command-line flags.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from pathlib import Path

CONFIG_ENV = "MATTEKIT_CONFIG"
RUN_SECTION = "run"


def config_path(explicit: str | None) -> Path | None:
    value = explicit or os.environ.get(CONFIG_ENV)
    return Path(value) if value else None


def load_config(path: Path | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        parser.read(path, encoding="utf-8")
    return parser


def _convert(action: argparse.Action, raw: str):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if action.nargs in ("+", "*"):
        values = raw.split()
        return [action.type(v) for v in values] if action.type else values
    return action.type(raw) if action.type else raw


def apply_config(sub: argparse.ArgumentParser, cfg: configparser.ConfigParser, command: str) -> dict[str, str]:
    """Install config values as defaults on ``sub``; returns what was applied."""
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    applied: dict[str, str] = {}
    for section in (RUN_SECTION, command):
        if not cfg.has_section(section):
            continue
        for key, raw in cfg.items(section):
            dest = key.replace("-", "_")
            if dest not in actions:
                if section == command:
                    raise ValueError(f"unknown key {key!r} in config section [{section}]")
                continue
            sub.set_defaults(**{dest: _convert(actions[dest], raw)})
            applied[dest] = raw
    return applied


class JsonLineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        payload = {"level": record.levelname.lower(), "logger": record.name, "msg": record.getMessage()}
        extra = getattr(record, "fields", None)
        if extra:
            payload.update(extra)
        return json.dumps(payload, default=str)


def setup_logging(level: str = "INFO") -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLineFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level.upper())
