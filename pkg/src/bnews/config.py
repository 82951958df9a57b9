"""Configuration files for the CLI: flat key=value text with one section
per module, parsed with configparser.

Every output artifact embeds the fully merged configuration in its
metadata header, so re-running from that header reproduces the numeric
columns byte for byte.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError


class RunConfig:
    """Merged view of a config file and command-line overrides."""

    def __init__(self, sections: dict[str, dict[str, str]]):
        self.sections = {
            name: dict(body) for name, body in sections.items()
        }

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (configparser.Error, OSError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        return cls({name: dict(parser[name]) for name in parser.sections()})

    def override(self, section: str, **values) -> "RunConfig":
        """New config with non-None values merged into one section."""
        merged = {k: dict(v) for k, v in self.sections.items()}
        body = merged.setdefault(section, {})
        for key, val in values.items():
            if val is not None:
                body[key] = str(val)
        return RunConfig(merged)

    def section(self, name: str) -> dict[str, str]:
        return self.sections.get(name, {})

    # typed getters -----------------------------------------------------
    def _raw(self, section, key, default):
        body = self.sections.get(section, {})
        if key not in body:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key [{section}] {key}")
            return None
        return body[key]

    def get_str(self, section, key, default=None):
        raw = self._raw(section, key, default)
        return default if raw is None else raw

    def get_float(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(
                f"[{section}] {key}={raw!r} is not a number"
            ) from exc

    def get_int(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(
                f"[{section}] {key}={raw!r} is not an integer"
            ) from exc

    def get_bool(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key}={raw!r} is not a boolean")

    def require_float(self, section, key):
        return self.get_float(section, key, _REQUIRED)

    def require_int(self, section, key):
        return self.get_int(section, key, _REQUIRED)

    def require_str(self, section, key):
        return self.get_str(section, key, _REQUIRED)

    # serialization ------------------------------------------------------
    def flat_items(self):
        """(section.key, value) pairs in deterministic order."""
        for section in sorted(self.sections):
            for key in sorted(self.sections[section]):
                yield f"{section}.{key}", self.sections[section][key]

    def metadata(self) -> dict:
        return {name: value for name, value in self.flat_items()}

    def header_lines(self) -> list[str]:
        return [f"# {name}={value}" for name, value in self.flat_items()]

    def write(self, path):
        parser = configparser.ConfigParser(interpolation=None)
        for name in sorted(self.sections):
            parser[name] = dict(sorted(self.sections[name].items()))
        with open(path, "w") as fh:
            parser.write(fh)


class _Required:
    pass


_REQUIRED = _Required()
