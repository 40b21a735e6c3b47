import pytest

from shapestring.config import DEFAULT_CONFIG_FILE
from shapestring.exceptions import ConfigError
from shapestring.utils.config import DEFAULTS, HELP, RunConfig, coerce_value


def test_defaults(run_config):
    assert run_config.to_dict() == DEFAULTS
    assert run_config.get('resample_n') == 200
    assert run_config.get('q_dist_edges') == (1.0 / 3.0, 2.0 / 3.0)
    assert run_config.get('missing', 'fallback') == 'fallback'
    assert set(HELP) == set(DEFAULTS)


def test_packaged_default_file_matches_defaults():
    assert RunConfig(DEFAULT_CONFIG_FILE, use_env=False).to_dict() == DEFAULTS


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv('SHAPESTRING_ARP_ANGULAR_COUNT', '12')
    monkeypatch.setenv('SHAPESTRING_RETRIEVAL_PREFILTER', 'off')
    monkeypatch.delenv('SHAPESTRING_CONFIG_FILE', raising=False)
    config = RunConfig()
    assert config.get('arp_angular_count') == 12
    assert config.get('retrieval_prefilter') is False
    assert RunConfig(use_env=False).get('arp_angular_count') == 8


def test_file_overrides_environment(tmp_path, monkeypatch):
    monkeypatch.setenv('SHAPESTRING_Q_ANGLE_BINS', '4')
    path = tmp_path / 'run.cfg'
    path.write_text('# tuned\n\nq_angle_bins = 5\nlog_level=debug\nq_dist_edges=0.25, 0.75\n')
    config = RunConfig(path)
    assert config.get('q_angle_bins') == 5
    assert config.get('log_level') == 'DEBUG'
    assert config.get('q_dist_edges') == (0.25, 0.75)


def test_bad_files_and_values(tmp_path, run_config):
    path = tmp_path / 'bad.cfg'
    path.write_text('resample_n\n')
    with pytest.raises(ConfigError):
        RunConfig(path, use_env=False)

    path.write_text('no_such_key=1\n')
    with pytest.raises(ConfigError):
        RunConfig(path, use_env=False)

    with pytest.raises(ConfigError):
        RunConfig(tmp_path / 'missing.cfg', use_env=False)
    with pytest.raises(ConfigError):
        run_config.set('arp_circle', 'square')
    with pytest.raises(ConfigError):
        run_config.set('resample_n', 'many')
    with pytest.raises(ConfigError):
        coerce_value('n_jobs', 2.5)


def test_save_and_reload(tmp_path, run_config):
    run_config.update({'arp_radial_count': 3, 'q_dist_edges': '0.2,0.6', 'pose_mode': 'pairwise'})
    path = tmp_path / 'saved.cfg'
    run_config.save_to_file(path)
    reloaded = RunConfig(path, use_env=False)
    assert reloaded.to_dict() == run_config.to_dict()


def test_fingerprint_tracks_encoding_settings_only(run_config):
    base = run_config.fingerprint()
    assert len(base) == 16
    assert RunConfig(use_env=False).fingerprint() == base

    for key in ('pose_mode', 'n_jobs', 'score_gap', 'log_level', 'retrieval_prefilter'):
        other = RunConfig(use_env=False)
        other.set(key, {'pose_mode': 'pairwise', 'n_jobs': 4, 'score_gap': -1.0,
                        'log_level': 'DEBUG', 'retrieval_prefilter': False}[key])
        assert other.fingerprint() == base, key

    for key, value in (('arp_angular_count', 12), ('q_angle_bins', 5), ('resample_n', 100),
                       ('section_window', 3), ('sc_dummy_cost', 0.5)):
        other = RunConfig(use_env=False)
        other.set(key, value)
        assert other.fingerprint() != base, key

    settings = run_config.encoding_settings()
    assert settings['arp_angular_count'] == '8'
    assert 'pose_mode' not in settings


def test_typed_sub_configs(run_config):
    assert run_config.arp_config().sector_count == 32
    assert run_config.sc_config().bin_count == 60
    assert run_config.section_config().window == 5
    assert run_config.quantizer_config().angle_bins == 6
    assert run_config.score_table().match_score == 2.0
