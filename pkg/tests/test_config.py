import json

import pytest

from chicap._config import Tolerances, get_tolerances, load_config, tolerances, tolerances_from_config


def test_defaults():
    t = Tolerances()
    assert t.tol_eig == 1e-12 and t.tol_supp == 1e-9 and t.tol_rank == 1e-10


def test_replace_rejects_unknown_keys():
    with pytest.raises(KeyError):
        Tolerances().replace(tol_nope=1.0)


def test_context_manager_restores():
    before = get_tolerances()
    with tolerances(tol_eig=1e-8):
        assert get_tolerances().tol_eig == 1e-8
    assert get_tolerances() == before


def test_config_file(tmp_path, monkeypatch):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"numerics": {"tolerances": {"tol_rank": 1e-6}}}))
    assert tolerances_from_config(load_config(p)).tol_rank == 1e-6
    monkeypatch.setenv("CHICAP_CONFIG", str(p))
    assert tolerances_from_config(load_config()).tol_rank == 1e-6
    monkeypatch.delenv("CHICAP_CONFIG")
    assert load_config() == {}
