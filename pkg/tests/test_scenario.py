"""Scenario parsing, unit handling, and round-trips."""
import numpy as np
import pytest

from dual_irs_opt import ScenarioError, format_scenario, parse_scenario
from dual_irs_opt.scenario import DEFAULT_SCENARIO


def test_empty_text_yields_the_default_scenario():
    assert parse_scenario("") == DEFAULT_SCENARIO
    assert parse_scenario("# only a comment\n\n") == DEFAULT_SCENARIO


def test_default_values_match_the_reference_setup():
    sc = DEFAULT_SCENARIO
    assert (sc.bs_user_distance, sc.irs_altitude) == (200.0, 5.0)
    assert (sc.n_users, sc.zone_radius) == (4, 30.0)
    assert (sc.total_elements, sc.n_bs_antennas) == (128, 4)
    assert sc.wavelength == 0.4
    assert sc.ref_gain == pytest.approx(1e-3)
    assert sc.per_element_power == pytest.approx(1e-3)
    assert sc.user_noise == sc.irs_noise == pytest.approx(1e-11)


def test_dbm_conversion():
    sc = parse_scenario("sigma0 = -80 dBm\n")
    assert sc.user_noise == pytest.approx(1e-11)
    sc = parse_scenario("P_e = 0 dBm\n")
    assert sc.per_element_power == pytest.approx(1e-3)


def test_db_and_metric_units():
    sc = parse_scenario("beta = -30 dB\nP_e = 2 mW\nD = 150 m\nP_B = 2 W\n")
    assert sc.ref_gain == pytest.approx(1e-3)
    assert sc.per_element_power == pytest.approx(2e-3)
    assert sc.bs_user_distance == 150.0
    assert sc.tx_power == 2.0


def test_unknown_unit_and_key_errors():
    with pytest.raises(ScenarioError, match="unknown unit"):
        parse_scenario("P_e = 1 kW\n")
    with pytest.raises(ScenarioError, match="unknown keys: bogus, wat"):
        parse_scenario("wat = 1\nbogus = 2\n")


def test_malformed_line_reports_its_number():
    with pytest.raises(ScenarioError, match="line 3"):
        parse_scenario("D = 200 m\n\nnot a pair\n")
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scenario("M = 64\nN = abc\n")


def test_field_validation_names_the_field():
    with pytest.raises(ScenarioError, match="field M"):
        parse_scenario("M = 0\n")
    with pytest.raises(ScenarioError, match="field sigma0"):
        parse_scenario("sigma0 = -1\n")
    with pytest.raises(ScenarioError, match="field x_min"):
        parse_scenario("x_min = 100 m\nD = 250 m\n")


def test_integer_keys_reject_fractions():
    with pytest.raises(ScenarioError, match="integer"):
        parse_scenario("M = 2.5\n")


def test_explicit_users_parse_and_validate():
    sc = parse_scenario("L = 2\nusers = 10:0.5; 20:3.1\n")
    assert sc.users == ((10.0, 0.5), (20.0, 3.1))
    geo = sc.geometry()
    assert geo.users == sc.users
    with pytest.raises(ScenarioError, match="field users"):
        parse_scenario("users = 10:0.5\n")  # default L is 4
    with pytest.raises(ScenarioError, match="radius:azimuth"):
        parse_scenario("L = 1\nusers = 10\n")


def test_seeded_draw_is_deterministic_and_inside_the_zone():
    sc = parse_scenario("seed = 7\n")
    one = sc.geometry()
    two = sc.geometry()
    assert one.users == two.users
    assert all(0 <= r <= 30.0 and 0 <= a < 2 * np.pi for r, a in one.users)
    other = parse_scenario("seed = 8\n").geometry()
    assert other.users != one.users


def test_round_trip_recovers_an_equivalent_scenario():
    for text in ("",
                 "D = 120 m\nH = 9 m\nseed = 3\nalpha = 2.5\n",
                 "L = 2\nusers = 5:1.0; 8:2.0\nP_e = 10 mW\nd_I = 0.25 m\n"):
        sc = parse_scenario(text)
        assert parse_scenario(format_scenario(sc)) == sc


def test_system_params_and_geometry_agree_with_fields():
    sc = parse_scenario("M = 64\nN = 2\nL = 1\nlambda = 0.2 m\n")
    params = sc.system_params()
    assert params.total_elements == 64
    assert params.n_bs_antennas == 2
    assert params.element_spacing == pytest.approx(0.1)  # half wavelength
    assert sc.geometry().n_users == 1
