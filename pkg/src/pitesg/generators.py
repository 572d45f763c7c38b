"""Uniform fit/forecast interface over the four scenario generators.

Every generator is fitted on a panel slice and forecasts from a history
panel whose last row is the latest information available. The weekly
machine-learning models produce five trading days per condition, so longer
horizons are built week by week.
"""
from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cvae, fhs, garch, rbm
from .marketdata import AlignedPanel, weekly_panel
from .optim import OptimConfig
from .scenarios import ScenarioSet

NAMES = ("fhs", "garch", "rbm", "cvae")


def derived_seed(seed: int, *keys: int) -> int:
    """Independent 32-bit seed for a sub-task, stable across runs."""
    return int(np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1)[0])


def week_conditions(panel: AlignedPanel, start: dt.date, n_weeks: int):
    """VIX close on the last panel date before each week's Monday.

    Weeks beyond the panel reuse its last close. Returns ``(values, dates)``.
    """
    vals, dates = [], []
    for w in range(n_weeks):
        monday = start + dt.timedelta(weeks=w)
        k = panel.index_before(monday)
        if k == 0:
            raise ValueError(f"no VIX observation before {monday}")
        vals.append(float(panel.vix_level[k - 1]))
        dates.append(panel.dates[k - 1])
    return np.array(vals), dates


class Generator:
    name = ""

    def __init__(self):
        self.training_end: dt.date | None = None

    def fit(self, panel: AlignedPanel) -> "Generator":
        self.training_end = panel.dates[-1]
        self._fit(panel)
        return self

    def _fit(self, panel: AlignedPanel) -> None:
        raise NotImplementedError

    def forecast(self, history: AlignedPanel, horizon: int, n_paths: int, seed: int,
                 conditions=None) -> ScenarioSet:
        """Paths for the ``horizon`` trading days after ``history``.

        ``conditions`` optionally gives one VIX level per week (weekly models
        only); otherwise the last VIX close of ``history`` is used throughout.
        """
        raise NotImplementedError

    def checkpoint(self) -> dict:
        raise NotImplementedError

    def save(self, path) -> None:
        doc = self.checkpoint()
        doc["generator"] = self.name
        doc["training_end"] = self.training_end.isoformat() if self.training_end else None
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")


class FhsGenerator(Generator):
    name = "fhs"

    def __init__(self):
        super().__init__()
        self.model: fhs.FhsModel | None = None

    def _fit(self, panel):
        self.model = fhs.FhsModel.fit(panel)

    def forecast(self, history, horizon, n_paths, seed, conditions=None):
        target = float(history.vix_level[-1])
        return fhs.generate(self.model, target, horizon, n_paths, seed)

    def checkpoint(self):
        return self.model.to_dict()


@dataclass
class GarchSettings:
    optim: OptimConfig = field(default_factory=OptimConfig)
    risk_neutral: str = "free"
    dist: str = "t4"


class GarchGenerator(Generator):
    name = "garch"

    def __init__(self, settings: GarchSettings | None = None):
        super().__init__()
        self.settings = settings or GarchSettings()
        self.params: garch.GarchParams | None = None
        self.result = None

    def _fit(self, panel):
        s = self.settings
        self.params, self.result = garch.fit_joint(panel, s.optim, s.risk_neutral, s.dist, return_result=True)

    def forecast(self, history, horizon, n_paths, seed, conditions=None):
        state = garch.final_state(self.params, history.spx_log_return)
        scen = garch.simulate_paths(self.params, state, horizon, n_paths, seed, self.settings.dist)
        scen.condition_vix = float(history.vix_level[-1])
        return scen

    def checkpoint(self):
        return {"model": "garch", "params": self.params.to_dict(), "settings": {
            "risk_neutral": self.settings.risk_neutral, "dist": self.settings.dist,
            "optim": asdict(self.settings.optim)}}


class _WeeklyGenerator(Generator):
    days = 5

    def _generate_week(self, vix: float, n_paths: int, seed: int) -> np.ndarray:
        raise NotImplementedError

    def forecast(self, history, horizon, n_paths, seed, conditions=None):
        if horizon < 1 or n_paths < 1:
            raise ValueError("horizon and n_paths must be >= 1")
        n_weeks = math.ceil(horizon / self.days)
        last = float(history.vix_level[-1])
        if conditions is None:
            conds = [last] * n_weeks
        else:
            conds = list(np.asarray(conditions, dtype=float))
            if len(conds) < n_weeks:
                raise ValueError(f"need {n_weeks} weekly conditions, got {len(conds)}")
        blocks = [self._generate_week(conds[w], n_paths, derived_seed(seed, w)) for w in range(n_weeks)]
        out = np.hstack(blocks)[:, :horizon]
        return ScenarioSet(out, condition_vix=float(conds[0]), generator=self.name, seed=seed)


@dataclass
class CvaeSettings:
    epochs: int = 50_000
    learning_rate: float = 5e-4
    kl_weight: float = 1e-3
    latent_dim: int = 2
    enc_hidden: tuple = (30,)
    dec_hidden: tuple = (30,)
    batch_size: int = 1
    seed: int = 0


class CvaeGenerator(_WeeklyGenerator):
    name = "cvae"

    def __init__(self, settings: CvaeSettings | None = None):
        super().__init__()
        self.settings = settings or CvaeSettings()
        self.model: cvae.CvaeModel | None = None
        self.log = None

    def _fit(self, panel):
        s = self.settings
        self.model, self.log = cvae.train_weekly(
            weekly_panel(panel), s.epochs, s.learning_rate, s.seed, s.kl_weight, s.latent_dim,
            tuple(s.enc_hidden), tuple(s.dec_hidden), batch_size=s.batch_size)

    def _generate_week(self, vix, n_paths, seed):
        return cvae.generate(self.model, vix, n_paths, seed).returns

    def checkpoint(self):
        d = self.model.to_dict()
        d["settings"] = asdict(self.settings)
        return d


@dataclass
class RbmSettings:
    cd: rbm.CdConfig = field(default_factory=rbm.CdConfig)
    n_hidden: int = 32


class RbmGenerator(_WeeklyGenerator):
    name = "rbm"

    def __init__(self, settings: RbmSettings | None = None):
        super().__init__()
        self.settings = settings or RbmSettings()
        self.model: rbm.RbmWeeklyModel | None = None
        self.log = None

    def _fit(self, panel):
        cd = self.settings.cd
        self.model, self.log = rbm.RbmWeeklyModel.fit(weekly_panel(panel), cd, self.settings.n_hidden,
                                                      log_every=max(1, cd.epochs // 100))

    def _generate_week(self, vix, n_paths, seed):
        return self.model.generate(vix, n_paths, seed).returns

    def checkpoint(self):
        d = self.model.to_dict()
        d["n_hidden"] = self.settings.n_hidden
        return d


def load_generator(path) -> Generator:
    """Rebuild a fitted generator from :meth:`Generator.save` output."""
    with open(path) as fh:
        doc = json.load(fh)
    name = doc.get("generator") or doc.get("model")
    if name == "fhs":
        g = FhsGenerator()
        g.model = fhs.FhsModel.from_dict(doc)
    elif name == "garch":
        s = doc.get("settings", {})
        g = GarchGenerator(GarchSettings(OptimConfig(**s.get("optim", {})), s.get("risk_neutral", "free"),
                                         s.get("dist", "t4")))
        g.params = garch.GarchParams.from_dict(doc["params"])
    elif name == "cvae":
        s = dict(doc.get("settings", {}))
        for k in ("enc_hidden", "dec_hidden"):
            if k in s:
                s[k] = tuple(s[k])
        g = CvaeGenerator(CvaeSettings(**s))
        g.model = cvae.CvaeModel.from_dict(doc)
    elif name == "rbm":
        g = RbmGenerator()
        g.model = rbm.RbmWeeklyModel.from_dict(doc)
        g.settings = RbmSettings(g.model.config, int(doc.get("n_hidden", g.model.params.n)))
    else:
        raise ValueError(f"{path}: unknown generator {name!r}")
    end = doc.get("training_end")
    g.training_end = dt.date.fromisoformat(end) if end else None
    return g


def make_generator(name: str, **settings) -> Generator:
    if name == "fhs":
        return FhsGenerator()
    if name == "garch":
        return GarchGenerator(settings.get("garch"))
    if name == "cvae":
        return CvaeGenerator(settings.get("cvae"))
    if name == "rbm":
        return RbmGenerator(settings.get("rbm"))
    raise ValueError(f"unknown generator {name!r}; choose from {', '.join(NAMES)}")
