"""INI run configuration with one section per model.

Grammar: standard INI (``[section]`` headers, ``key = value`` lines, ``#``
comments). Keys are case sensitive. Values are parsed as the type of the built-in default; tuples are
comma separated. Command-line flags override file values, and the effective
configuration is written next to every command's outputs.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, fields, replace

from .backtest import StrategyConfig
from .generators import CvaeSettings, GarchSettings, RbmSettings
from .optim import OptimConfig
from .rbm import CdConfig
from .toy import GarchToyConfig, MixtureToyConfig


class ConfigError(ValueError):
    pass


SECTIONS = {
    "optim": OptimConfig,
    "rbm": CdConfig,
    "cvae": CvaeSettings,
    "strategy": StrategyConfig,
    "toy_mixture": MixtureToyConfig,
    "toy_garch": GarchToyConfig,
}
EXTRA = {"garch": {"risk_neutral": "free", "dist": "t4"}, "rbm": {"n_hidden": 32}}


def _parse(text: str, default):
    text = text.strip()
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {text!r}")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if default and isinstance(default[0], int):
            return tuple(int(t) for t in items)
        return tuple(items)
    return text


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


class RunConfig:
    """Holds one dataclass per section plus a few loose keys."""

    def __init__(self):
        self.sections = {name: cls() for name, cls in SECTIONS.items()}
        self.extra = {k: dict(v) for k, v in EXTRA.items()}

    @classmethod
    def load(cls, path=None) -> "RunConfig":
        cfg = cls()
        if path is None:
            return cfg
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str  # keys such as L and L_star are case sensitive
        if not parser.read(path):
            raise ConfigError(f"cannot read config file {path}")
        for sec in parser.sections():
            for key, text in parser.items(sec):
                cfg.set(sec, key, text)
        return cfg

    def set(self, section: str, key: str, value) -> None:
        if section in self.sections:
            obj = self.sections[section]
            names = {f.name for f in fields(obj)}
            if key in names:
                default = getattr(obj, key)
                val = _parse(value, default) if isinstance(value, str) else value
                try:
                    self.sections[section] = replace(obj, **{key: val})
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from None
                return
        if section in self.extra and key in self.extra[section]:
            default = self.extra[section][key]
            self.extra[section][key] = _parse(value, default) if isinstance(value, str) else value
            return
        raise ConfigError(f"unknown config key [{section}] {key}")

    def __getitem__(self, section):
        return self.sections[section]

    def garch_settings(self) -> GarchSettings:
        e = self.extra["garch"]
        return GarchSettings(self.sections["optim"], e["risk_neutral"], e["dist"])

    def rbm_settings(self) -> RbmSettings:
        return RbmSettings(self.sections["rbm"], int(self.extra["rbm"]["n_hidden"]))

    def cvae_settings(self) -> CvaeSettings:
        return self.sections["cvae"]

    def write(self, path) -> None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for name in sorted(set(self.sections) | set(self.extra)):
            parser[name] = {}
            if name in self.sections:
                for k, v in asdict(self.sections[name]).items():
                    parser[name][k] = _fmt(v)
            for k, v in self.extra.get(name, {}).items():
                parser[name][k] = _fmt(v)
        with open(path, "w") as fh:
            parser.write(fh)
