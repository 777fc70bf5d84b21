"""Run configuration: flat ``key = value`` files with per-task defaults."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

from .errors import ConfigError
from .learner import TemplateConfig
from .sampling import DEFAULT_TEMPERATURES, GeneratorConfig, ProblemInstance

DATA = files("asglearn").joinpath("data")

TASKS = {
    "anbncn": {
        "cfg": "abc.cfg",
        "ground_truth": "anbncn.asg",
        "oracle": "anbncn",
        "exemplars": ("abc", "aabbcc", "aaabbbccc"),
        "instruction": "Generate a string a^n b^n c^n with n = {n}.",
    },
    "anbncm": {
        "cfg": "abc.cfg",
        "ground_truth": "anbncm.asg",
        "oracle": "anbncm",
        "exemplars": ("abcc", "aabbc", "abccc"),
        "instruction": "Generate a string a^n b^n c^m with n = {n} and any m >= 1.",
    },
}


def bundled(name: str) -> str:
    return str(DATA.joinpath(name))


@dataclass
class RunConfig:
    task: str = "anbncn"
    cfg: str = ""
    ground_truth: str = ""
    vocabulary: tuple[str, ...] = ("a", "b", "c")
    provider: str = "ngram"
    ngram_order: int = 3
    exemplars: tuple[str, ...] = ()
    provider_url: str = "http://127.0.0.1:8000/logits"
    provider_timeout: float = 10.0
    provider_retries: int = 2
    instances: int = 3
    temperatures: tuple[float, ...] = DEFAULT_TEMPERATURES
    samples_per_temperature: int = 10
    max_tokens: int = 24
    oracle: str = ""
    oracle_timeout: float = 60.0
    templates: tuple[str, ...] = ("equality", "nonempty")
    forest_cap: int = 64
    mask_budget: int = 16
    eval_samples: int = 500
    eval_temperature: float = 1.0
    lmax: int = 12
    seed: int = 0
    out: str = "runs/out"
    ilasp_export: bool = False
    workers: int = 1
    instance_list: tuple[ProblemInstance, ...] = field(default=(), repr=False)

    def __post_init__(self):
        self.resolve()

    def resolve(self) -> RunConfig:
        preset = TASKS.get(self.task)
        if preset is None and not (self.cfg and self.oracle):
            raise ConfigError(f"unknown task {self.task!r}: give cfg and oracle explicitly")
        if preset:
            self.cfg = self.cfg or bundled(preset["cfg"])
            self.ground_truth = self.ground_truth or bundled(preset["ground_truth"])
            self.oracle = self.oracle or preset["oracle"]
            self.exemplars = self.exemplars or preset["exemplars"]
        for key in ("cfg", "ground_truth"):
            path = getattr(self, key)
            if path and not Path(path).is_file():
                raise ConfigError(f"{key}: no such file {path}")
        if self.provider not in ("uniform", "ngram", "remote"):
            raise ConfigError(f"provider must be uniform, ngram or remote, not {self.provider!r}")
        unknown = set(self.templates) - {"equality", "nonempty", "inequality"}
        if unknown:
            raise ConfigError(f"unknown template families {sorted(unknown)}")
        if self.lmax < max((len(e) for e in self.exemplars), default=0):
            raise ConfigError("lmax is shorter than the longest exemplar")
        self.generator  # validates the schedule
        return self

    @property
    def generator(self) -> GeneratorConfig:
        return GeneratorConfig(self.temperatures, self.samples_per_temperature,
                               self.max_tokens, self.seed)

    @property
    def template_config(self) -> TemplateConfig:
        return TemplateConfig(equality="equality" in self.templates,
                              nonempty="nonempty" in self.templates,
                              inequality="inequality" in self.templates)

    def problem_instances(self) -> list[ProblemInstance]:
        if self.instance_list:
            return list(self.instance_list)
        preset = TASKS.get(self.task, {})
        text = preset.get("instruction", "Generate a string for instance {n}.")
        ex = self.exemplars
        return [ProblemInstance(
            f"{self.task}-{i}", text.format(n=i + 1),
            {"max_n": i + 1, "exemplars": (ex[i % len(ex)],) if ex else ()})
            for i in range(self.instances)]

    def with_overrides(self, **kw) -> RunConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            if f.name == "instance_list":
                continue
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(map(str, value))
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _convert(name: str, raw: str, default):
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
        return raw.lower() in ("true", "1", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        items = [s.strip() for s in raw.split(",")] if raw else []
        if name == "temperatures":
            return tuple(float(s) for s in items)
        return tuple(items)
    return raw


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Read ``key = value`` lines; ``#`` starts a comment, relative paths resolve
    against ``base_dir``."""
    defaults = {f.name: f.default for f in dataclasses.fields(RunConfig)
                if f.name != "instance_list"}
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in defaults:
            raise ConfigError(f"config line {n}: unknown key {key!r}")
        try:
            values[key] = _convert(key, raw, defaults[key])
        except ValueError as exc:
            raise ConfigError(f"config line {n}: {exc}") from None
    if base_dir is not None:
        for key in ("cfg", "ground_truth", "out"):
            if values.get(key) and not Path(values[key]).is_absolute():
                values[key] = str(base_dir / values[key])
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), path.parent)
