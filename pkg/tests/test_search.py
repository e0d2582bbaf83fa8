import csv
import io
import json

import numpy as np
import pytest

from tensnorm.nuclear import AltOptions, nuclear_upper
from tensnorm.quantum import dtrace, known_state, ppt_check
from tensnorm.search import (ExperimentConfig, random_separable_density, random_state,
                             run_experiment)
from tensnorm.spectral import spectral_lower
from tensnorm.tensor_core import Field, hs_norm


def test_random_state_is_unit_and_replayable():
    for fld in Field:
        a = random_state((2, 3, 2), fld, np.random.default_rng(4))
        b = random_state((2, 3, 2), fld, np.random.default_rng(4))
        assert abs(hs_norm(a) - 1) < 1e-12
        assert np.array_equal(a.data, b.data)
        assert a.field is fld


def test_random_state_entries_are_centred():
    rng = np.random.default_rng(0)
    samples = np.array([random_state((2, 2), Field.COMPLEX, rng).data for _ in range(10000)])
    # real and imaginary parts each have variance close to 1/8
    mean = samples.mean(axis=0)
    five_sigma = 5 * np.sqrt(1 / 8) / np.sqrt(len(samples))
    assert np.all(np.abs(mean.real) < five_sigma)
    assert np.all(np.abs(mean.imag) < five_sigma)
    # real and imaginary parts carry equal variance
    assert np.isclose(np.var(samples.real), np.var(samples.imag), rtol=0.1)


def test_random_separable_density_is_valid():
    for k in range(5):
        rho = random_separable_density((2, 2), Field.COMPLEX, np.random.default_rng(k))
        assert np.isclose(dtrace(rho), 1.0)
        assert np.linalg.eigvalsh(rho.matrix)[0] > -1e-12
        assert ppt_check(rho, (0,))[0]


def test_injected_state_matches_direct_calls():
    w = known_state("W", n=3)
    cfg = ExperimentConfig((2, 2, 2), Field.COMPLEX, num_samples=1, restarts=3, spectral_restarts=5)
    rep = run_experiment(cfg, [w])
    row = rep.rows[0]
    nuc = nuclear_upper(w, Field.COMPLEX, AltOptions(restarts=3, rng_seed=row["seed"]))
    spec = spectral_lower(w, Field.COMPLEX, restarts=5, seed=row["seed"])
    assert rep.best_values["nuclear"] == nuc.value
    assert rep.best_values["spectral"] == spec.value
    assert np.array_equal(rep.best_state.data, w.data)


def test_report_exports_and_replay():
    cfg = ExperimentConfig((2, 2), Field.REAL, num_samples=4, restarts=2, spectral_restarts=3,
                           rng_seed=3, objective="min-spectral")
    rep = run_experiment(cfg)
    again = run_experiment(cfg)
    keys = ("nuclear", "spectral", "product", "eta", "omega", "seed")
    assert [[r[k] for k in keys] for r in rep.rows] == [[r[k] for k in keys] for r in again.rows]
    assert rep.best_values["spectral"] == min(r["spectral"] for r in rep.rows)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert len(rows) == 4 and float(rows[0]["nuclear"]) == rep.rows[0]["nuclear"]
    doc = json.loads(rep.to_json())
    assert doc["best_index"] == rep.best_index
    assert set(doc["summary"]["iterations"]) == {"min", "avg", "max"}
    # 2x2 real matrices: nuclear norm at most sqrt(2), spectral at least 1/sqrt(2)
    for r in rep.rows:
        assert r["nuclear"] <= np.sqrt(2) + 1e-6 and r["spectral"] >= 1 / np.sqrt(2) - 1e-9


def test_failures_are_recorded_not_raised():
    cfg = ExperimentConfig((2, 2), Field.REAL, num_samples=2, restarts=1, spectral_restarts=1)
    rep = run_experiment(cfg, [np.zeros((2, 2)), np.eye(2) / np.sqrt(2)])
    assert rep.rows[0]["error"].startswith("ValueError")
    assert rep.best_index == 1


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig((2, 2), num_samples=0)
    with pytest.raises(ValueError):
        ExperimentConfig((2, 2), objective="max-fun")
    with pytest.raises(ValueError):
        ExperimentConfig((2, 3), symmetric=True)
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig((2, 2), num_samples=2), [np.eye(2)])
