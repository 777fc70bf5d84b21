import pytest

from asglearn.config import RunConfig, TASKS, load_config, parse_config
from asglearn.errors import ConfigError


def test_presets_fill_paths():
    for task in TASKS:
        cfg = RunConfig(task=task)
        assert cfg.cfg.endswith(".cfg") and cfg.ground_truth.endswith(".asg")
        assert cfg.oracle == task


def test_parse_flat_file(tmp_path):
    text = """
    # comment line
    task = anbncm
    temperatures = 0, 0.5, 1
    samples_per_temperature = 4   # trailing comment
    templates = equality, nonempty, inequality
    ilasp_export = yes
    out = run1
    """
    cfg = parse_config(text, tmp_path)
    assert cfg.temperatures == (0.0, 0.5, 1.0)
    assert cfg.samples_per_temperature == 4
    assert cfg.template_config.inequality and cfg.ilasp_export
    assert cfg.out == str(tmp_path / "run1")
    assert cfg.generator.temperatures == (0.0, 0.5, 1.0)


def test_round_trip_through_text(tmp_path):
    cfg = RunConfig(task="anbncn", seed=7, instances=2, out=str(tmp_path / "o"))
    path = tmp_path / "run.cfg"
    path.write_text(cfg.to_text())
    again = load_config(path)
    assert again == cfg


@pytest.mark.parametrize("text", [
    "bogus = 1", "no equals sign", "seed = x", "provider = gpt", "templates = magic",
    "task = unknown", "cfg = /does/not/exist.cfg", "lmax = 3", "temperatures = 1, 1",
    "ilasp_export = maybe"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_overrides_ignore_none():
    cfg = RunConfig().with_overrides(seed=3, out=None)
    assert cfg.seed == 3 and cfg.out == RunConfig().out


def test_problem_instances():
    inst = RunConfig(instances=3).problem_instances()
    assert [i.id for i in inst] == ["anbncn-0", "anbncn-1", "anbncn-2"]
    assert inst[1].metadata["exemplars"] == ("aabbcc",)
