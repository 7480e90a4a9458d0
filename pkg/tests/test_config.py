import pytest

from fodeflab.config import Config, parallel_map, workers
from fodeflab.errors import InputError


def test_worker_cap_from_environment(monkeypatch):
    monkeypatch.delenv("FO_DEFLAB_THREADS", raising=False)
    assert workers() == 1
    monkeypatch.setenv("FO_DEFLAB_THREADS", "4")
    assert workers() == 4
    assert parallel_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]
    monkeypatch.setenv("FO_DEFLAB_THREADS", "many")
    with pytest.raises(InputError):
        workers()


def test_config_validation():
    with pytest.raises(InputError):
        Config(format="xml")
    with pytest.raises(InputError):
        Config(caps={"k": 0})
