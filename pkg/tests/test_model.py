"""Channel construction and the exact matrix link model."""
import numpy as np
import pytest

from dual_irs_opt import (
    Allocation,
    Geometry,
    InvalidInputError,
    Placement,
    ReflectionConfig,
    SingularGeometryError,
    SystemParams,
    build_channels,
    distances,
    panel_shape,
    per_element_power,
    snr_full,
    steering_vector,
)
from dual_irs_opt.closed_form import reflection_config
from dual_irs_opt.model import node_positions


def default_params(**overrides):
    values = dict(n_bs_antennas=4, total_elements=128, wavelength=0.4,
                  ref_gain=1e-3, pathloss_exp=2.0, tx_power=1.0,
                  per_element_power=1e-3, irs_noise=1e-11, user_noise=1e-11,
                  n_users=1)
    values.update(overrides)
    return SystemParams(**values)


def center_geometry(d=200.0, h=5.0):
    return Geometry(bs_user_distance=d, irs_altitude=h, users=((0.0, 0.0),))


# ---------------------------------------------------------------------------
# steering vectors and panel shapes
# ---------------------------------------------------------------------------

def test_single_element_is_phase_reference():
    assert steering_vector(0.7, 1.1, 1, 1, 0.5) == pytest.approx([1.0 + 0.0j])


def test_broadside_row_is_all_ones():
    vec = steering_vector(np.pi / 2, np.pi / 2, 4, 1, 0.5)
    assert vec == pytest.approx(np.ones(4))


def test_two_by_two_panel_matches_hand_expansion():
    # az=0, el=pi/2, s=1/2: horizontal factor [1, e^{-j pi}], vertical [1, 1];
    # the Kronecker product expands to [1, 1, -1, -1].
    vec = steering_vector(0.0, np.pi / 2, 2, 2, 0.5)
    assert vec == pytest.approx([1, 1, -1, -1], abs=1e-12)


def test_steering_constant_modulus_and_norm():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n_h, n_v = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        vec = steering_vector(rng.uniform(0, np.pi), rng.uniform(0, np.pi),
                              n_h, n_v, 0.5)
        assert np.abs(vec) == pytest.approx(np.ones(n_h * n_v), abs=1e-12)
        assert np.linalg.norm(vec) == pytest.approx(np.sqrt(n_h * n_v))


def test_steering_rejects_bad_inputs():
    with pytest.raises(InvalidInputError):
        steering_vector(np.nan, 1.0, 2, 2, 0.5)
    with pytest.raises(InvalidInputError):
        steering_vector(0.0, 1.0, 0, 2, 0.5)


@pytest.mark.parametrize("count,expected", [
    (1, (1, 1)), (4, (2, 2)), (6, (3, 2)), (12, (4, 3)), (64, (8, 8)),
    (127, (127, 1)),
])
def test_panel_shape_most_square(count, expected):
    assert panel_shape(count) == expected


def test_panel_shape_wide_first():
    rng = np.random.default_rng(2)
    for count in rng.integers(1, 5000, size=100):
        n_h, n_v = panel_shape(int(count))
        assert n_h * n_v == count and n_h >= n_v


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def test_distances_degenerate_offsets():
    geo = Geometry(bs_user_distance=10.0, irs_altitude=5.0, users=((0.0, 0.0),))
    d0, d1, d2 = distances(geo, Placement(0.0, 10.0, 0.0), 0)
    assert (d0, d1, d2) == pytest.approx((5.0, 10.0, 5.0))


def test_distances_three_four_five():
    geo = Geometry(bs_user_distance=200.0, irs_altitude=4.0, users=((0.0, 0.0),))
    d0, _, _ = distances(geo, Placement(3.0, 190.0, 7.0), 0)
    assert d0 == pytest.approx(5.0)


def test_distances_offset_user_matches_euclidean_oracle():
    geo = Geometry(bs_user_distance=200.0, irs_altitude=5.0,
                   users=((30.0, np.pi),))
    placement = Placement(100.0, 90.0, 10.0)
    _, _, d2 = distances(geo, placement, 0)
    assert d2 == pytest.approx(np.sqrt(425.0))
    pos = node_positions(geo, placement)
    assert d2 == pytest.approx(np.linalg.norm(pos["users"][0] - pos["irs2"]))


def test_distances_index_out_of_range():
    geo = center_geometry()
    with pytest.raises(InvalidInputError):
        distances(geo, Placement(10.0, 180.0, 10.0), 1)


# ---------------------------------------------------------------------------
# channel construction
# ---------------------------------------------------------------------------

def test_scalar_channels_equal_their_gains():
    params = default_params(n_bs_antennas=1, total_elements=2)
    ch = build_channels(params, center_geometry(), Placement(10, 180, 10),
                        Allocation(1, 1), 0)
    assert ch.h1_matrix.shape == (1, 1)
    assert ch.h1_matrix[0, 0] == pytest.approx(ch.h1_gain)
    assert ch.g_matrix[0, 0] == pytest.approx(ch.g_gain)
    assert ch.h2_vec[0].conjugate() == pytest.approx(ch.h2_gain)


def test_inter_surface_matrix_is_rank_one_outer_product():
    params = default_params()
    ch = build_channels(params, center_geometry(), Placement(17, 140, 43),
                        Allocation(48, 80), 0)
    outer = np.outer(ch.g1_vec, ch.g2_vec.conj())
    assert np.max(np.abs(ch.g_matrix - outer)) <= 1e-12 * np.abs(ch.g_gain)
    singular = np.linalg.svd(ch.g_matrix, compute_uv=False)
    assert singular[1] <= 1e-10 * singular[0]
    frob = np.linalg.norm(ch.g_matrix)
    assert frob == pytest.approx(abs(ch.g_gain) * np.sqrt(48 * 80))


def test_first_hop_gain_magnitude_reference_point():
    params = default_params()
    ch = build_channels(params, center_geometry(), Placement(10, 180, 10),
                        Allocation(64, 64), 0)
    assert abs(ch.h1_gain) ** 2 == pytest.approx(1e-3 / 125.0)
    assert abs(ch.h1_matrix[0, 0]) ** 2 == pytest.approx(1e-3 / 125.0)


def test_zero_hop_distance_is_singular():
    params = default_params()
    with pytest.raises(SingularGeometryError):
        build_channels(params, center_geometry(), Placement(10.0, 0.0, 190.0),
                       Allocation(64, 64), 0)


# ---------------------------------------------------------------------------
# exact SNR and per-element powers
# ---------------------------------------------------------------------------

def aligned_config(params, ch, amp1=None, amp2=None):
    config = reflection_config(params, ch)
    if amp1 is None and amp2 is None:
        return config
    return ReflectionConfig(phases1=config.phases1, phases2=config.phases2,
                            amp1=amp1, amp2=amp2, beam=config.beam)


def test_zero_amplification_means_zero_snr_and_power():
    params = default_params()
    ch = build_channels(params, center_geometry(), Placement(10, 180, 10),
                        Allocation(64, 64), 0)
    config = aligned_config(params, ch, amp1=0.0, amp2=0.0)
    assert snr_full(ch, config, params) == 0.0
    p1, p2 = per_element_power(ch, config, params)
    assert np.all(p1 == 0.0) and np.all(p2 == 0.0)


def test_passive_limit_matches_path_sum_oracle():
    # With unit amplitudes, aligned phases and no surface noise the SNR is a
    # coherent sum over all m1*m2 element pairs; expand that sum directly.
    params = default_params(irs_noise=1e-300, n_bs_antennas=2,
                            total_elements=4)
    geo = center_geometry()
    placement = Placement(10, 180, 10)
    ch = build_channels(params, geo, placement, Allocation(2, 2), 0)
    config = aligned_config(params, ch, amp1=1.0, amp2=1.0)
    gamma = snr_full(ch, config, params)

    path_sum = 0.0 + 0.0j
    fed = ch.h1_matrix @ config.beam
    for m2 in range(2):
        for m1 in range(2):
            path_sum += (ch.h2_vec[m2].conjugate()
                         * np.exp(1j * config.phases2[m2]) * ch.g_matrix[m2, m1]
                         * np.exp(1j * config.phases1[m1]) * fed[m1])
    expected = params.tx_power * abs(path_sum) ** 2 / params.user_noise
    assert gamma == pytest.approx(expected, rel=1e-12)

    closed = (params.n_bs_antennas * params.tx_power * params.ref_gain ** 3
              * 4 * 4 / (params.user_noise * (ch.d0 * ch.d1 * ch.d2) ** 2))
    assert gamma == pytest.approx(closed, rel=1e-9)


def test_snr_invariant_under_global_beam_phase():
    params = default_params()
    ch = build_channels(params, center_geometry(), Placement(25, 130, 45),
                        Allocation(40, 88), 0)
    config = reflection_config(params, ch)
    rotated = ReflectionConfig(phases1=config.phases1, phases2=config.phases2,
                               amp1=config.amp1, amp2=config.amp2,
                               beam=config.beam * np.exp(1j * 1.234))
    base = snr_full(ch, config, params)
    assert snr_full(ch, rotated, params) == pytest.approx(base, rel=1e-12)


def test_snr_rejects_mismatched_dimensions():
    params = default_params()
    ch = build_channels(params, center_geometry(), Placement(10, 180, 10),
                        Allocation(64, 64), 0)
    bad = ReflectionConfig(phases1=np.zeros(63), phases2=np.zeros(64),
                           amp1=1.0, amp2=1.0, beam=np.ones(4) / 2.0)
    with pytest.raises(InvalidInputError):
        snr_full(ch, bad, params)
    with pytest.raises(InvalidInputError):
        per_element_power(ch, bad, params)


def test_per_element_power_budget_equality_and_uniformity():
    params = default_params()
    ch = build_channels(params, center_geometry(), Placement(40, 120, 40),
                        Allocation(50, 78), 0)
    config = reflection_config(params, ch)
    p1, p2 = per_element_power(ch, config, params)
    budget = params.per_element_power
    assert np.max(np.abs(p1 / budget - 1.0)) <= 1e-9
    assert np.max(np.abs(p2 / budget - 1.0)) <= 1e-9
    assert np.ptp(p1) <= 1e-10 * np.max(p1)
    assert np.ptp(p2) <= 1e-10 * np.max(p2)


def test_first_surface_power_quadratic_in_amplitude():
    params = default_params()
    ch = build_channels(params, center_geometry(), Placement(10, 180, 10),
                        Allocation(64, 64), 0)
    config = reflection_config(params, ch)
    halved = ReflectionConfig(phases1=config.phases1, phases2=config.phases2,
                              amp1=config.amp1 / 2.0, amp2=config.amp2,
                              beam=config.beam)
    p1_full, _ = per_element_power(ch, config, params)
    p1_half, _ = per_element_power(ch, halved, params)
    assert p1_half == pytest.approx(p1_full / 4.0, rel=1e-12)


def test_beam_power_budget_enforced():
    with pytest.raises(InvalidInputError):
        ReflectionConfig(phases1=np.zeros(2), phases2=np.zeros(2),
                         amp1=1.0, amp2=1.0, beam=np.ones(4))


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

def test_params_reject_nonpositive_values():
    with pytest.raises(InvalidInputError):
        default_params(tx_power=0.0)
    with pytest.raises(InvalidInputError):
        default_params(total_elements=0)
    with pytest.raises(InvalidInputError):
        default_params(wavelength=-1.0)


def test_geometry_rejects_bad_users():
    with pytest.raises(InvalidInputError):
        Geometry(bs_user_distance=200.0, irs_altitude=5.0, users=((-1.0, 0.0),))
    with pytest.raises(InvalidInputError):
        Geometry(bs_user_distance=200.0, irs_altitude=5.0,
                 users=((1.0, 2.0 * np.pi),))


def test_default_element_spacing_is_half_wavelength():
    assert default_params().element_spacing == pytest.approx(0.2)
