import numpy as np
import pytest

from csibeam.database import CsiDatabase, generate_database, read_metadata, write_metadata
from csibeam.errors import ConfigurationError
from csibeam.harness.config import ExperimentConfig
from csibeam.harness.experiments import build_database


@pytest.fixture(scope='module')
def small():
    cfg = ExperimentConfig.from_dict({'trajectory': {'n_points': 40}})
    return build_database(cfg)


def test_database_shape(small):
    env, spec, db = small
    assert len(db) == 40
    assert db.M == env.M == 32
    assert [r.index for r in db] == list(range(40))


def test_database_read_only(small):
    db = small[2]
    with pytest.raises(ValueError):
        db.channels[0, 0] = 0


def test_one_point_trajectory(small):
    env = small[0]
    db = generate_database(np.array([[5.0, 4.5, 0.0]]), env)
    assert len(db) == 1


def test_roundtrip_and_byte_stable(small, tmp_path):
    db = small[2]
    p1, p2 = tmp_path / 'a.jsonl', tmp_path / 'b.jsonl'
    db.save(p1)
    back = CsiDatabase.load(p1)
    assert np.array_equal(back.channels, db.channels)
    assert np.array_equal(back.positions, db.positions)
    back.save(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_regeneration_is_bit_exact(tmp_path):
    cfg = ExperimentConfig.from_dict({'trajectory': {'n_points': 30}, 'seed': 5})
    build_database(cfg)[2].save(tmp_path / 'a.jsonl')
    build_database(cfg)[2].save(tmp_path / 'b.jsonl')
    assert (tmp_path / 'a.jsonl').read_bytes() == (tmp_path / 'b.jsonl').read_bytes()


def test_load_rejects_gaps(tmp_path):
    p = tmp_path / 'bad.jsonl'
    p.write_text('{"idx": 0, "re": [1], "im": [0]}\n{"idx": 2, "re": [1], "im": [0]}\n')
    with pytest.raises(ConfigurationError):
        CsiDatabase.load(p)
    p.write_text('')
    with pytest.raises(ConfigurationError):
        CsiDatabase.load(p)


def test_constructor_validation():
    with pytest.raises(ValueError):
        CsiDatabase(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        CsiDatabase(np.ones((3, 2)), positions=np.zeros((2, 3)))


def test_metadata_roundtrip(tmp_path):
    write_metadata(tmp_path / 'm.json', {'b': 1, 'a': [1.5]})
    assert read_metadata(tmp_path / 'm.json') == {'a': [1.5], 'b': 1}
