import math

import numpy as np
import pytest

from davnsim.core.errors import DegenerateGeometryError, InvalidParameterError, ZeroCapacityError
from davnsim.core.link_model import (
    capacity,
    channel_gain,
    d2d_link,
    d2v_link,
    elevation_angle,
    free_space_loss,
    mean_path_loss_d2v,
    mean_path_loss_d2v_expanded,
    noise_power_w,
    p_los,
    p_nlos,
    path_loss_d2d,
    path_loss_d2v,
    propagation_delay,
    sinr,
    transmit_energy,
    uav_distance,
)
from davnsim.core.models import DelayMode, LinkBudget, LinkGeometry
from fixtures import (
    FSPL_100M_DB,
    GAIN_81_05_DB,
    NOISE_POWER_W,
    P_LOS_AT_90,
    P_LOS_AT_A,
    PATH_LOSS_LOS_100M_DB,
    PATH_LOSS_NLOS_100M_DB,
    TRANSMIT_ENERGY_J,
)

BUDGET = LinkBudget()


def _overhead(height: float = 100.0) -> LinkGeometry:
    return LinkGeometry(0.0, 0.0, height, 0.0, 0.0)


def test_elevation_angle():
    """Directly overhead is 90 degrees; equal legs give 45"""
    assert elevation_angle(_overhead()) == pytest.approx(90.0)
    assert elevation_angle(LinkGeometry(0, 0, 50, 50, 0)) == pytest.approx(45.0)
    with pytest.raises(DegenerateGeometryError):
        elevation_angle(LinkGeometry(0, 0, 0, 10, 0))


def test_los_probability_golden_values():
    """p_los at theta = a is 1/(1+a); LoS and NLoS sum to one"""
    assert p_los(14.39, 14.39, 0.13) == pytest.approx(P_LOS_AT_A, rel=1e-9)
    assert p_los(90.0, 14.39, 0.13) == pytest.approx(P_LOS_AT_90, abs=1e-6)
    assert p_los(30.0, 14.39, 0.13) + p_nlos(30.0, 14.39, 0.13) == pytest.approx(1.0)


def test_los_probability_rejects_out_of_range_angles():
    """Angles outside [0, 90] are invalid"""
    with pytest.raises(InvalidParameterError):
        p_los(-1.0, 14.39, 0.13)
    with pytest.raises(InvalidParameterError):
        p_los(90.5, 14.39, 0.13)


def test_path_loss_golden_values():
    """100 m at 2.4 GHz"""
    assert free_space_loss(100.0, 2.4e9) == pytest.approx(FSPL_100M_DB, abs=0.01)
    geometry = _overhead()
    assert path_loss_d2v(geometry, BUDGET, True) == pytest.approx(PATH_LOSS_LOS_100M_DB, abs=0.01)
    assert path_loss_d2v(geometry, BUDGET, False) == pytest.approx(PATH_LOSS_NLOS_100M_DB, abs=0.01)
    with pytest.raises(DegenerateGeometryError):
        free_space_loss(0.0, 2.4e9)


def test_mean_path_loss_at_low_elevation():
    """theta = a mixes 6.5% LoS with 93.5% NLoS"""
    theta = math.radians(14.39)
    geometry = LinkGeometry(0.0, 0.0, 100 * math.sin(theta), 100 * math.cos(theta), 0.0)
    assert mean_path_loss_d2v(geometry, BUDGET) == pytest.approx(98.81, abs=0.01)


def test_mean_path_loss_bounds_and_expansion():
    """The mixture stays between LoS and NLoS; the expanded form agrees to 1e-9 dB"""
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        geometry = LinkGeometry(
            float(rng.uniform(-1000, 1000)),
            float(rng.uniform(-1000, 1000)),
            float(rng.uniform(1, 300)),
            float(rng.uniform(-1000, 1000)),
            float(rng.uniform(-1000, 1000)),
        )
        mean = mean_path_loss_d2v(geometry, BUDGET)
        assert path_loss_d2v(geometry, BUDGET, True) - 1e-9 <= mean
        assert mean <= path_loss_d2v(geometry, BUDGET, False) + 1e-9
        assert mean_path_loss_d2v_expanded(geometry, BUDGET) == pytest.approx(mean, abs=1e-9)


def test_channel_gain():
    """dB loss to linear gain, and the literal 1/PL reading"""
    assert channel_gain(81.05) == pytest.approx(GAIN_81_05_DB, rel=1e-3)
    assert channel_gain(0.0) == 1.0
    assert channel_gain(80.0, paper_literal=True) == pytest.approx(1 / 80)
    with pytest.raises(InvalidParameterError):
        channel_gain(0.0, paper_literal=True)


def test_noise_power():
    """-174 dBm/Hz over 100 MHz is -94 dBm"""
    assert noise_power_w(BUDGET) == pytest.approx(NOISE_POWER_W, rel=1e-12)


def test_sinr_and_capacity():
    """SINR with equal and mixed interferer powers, Shannon capacity"""
    noise = noise_power_w(BUDGET)
    assert sinr(1e-9, [], 0.28, BUDGET) == pytest.approx(0.28e-9 / noise)
    with_interference = sinr(1e-9, [1e-10], 0.28, BUDGET)
    assert with_interference == pytest.approx(0.28e-9 / (0.28e-10 + noise))
    mixed = sinr(1e-9, [1e-10, 2e-10], 0.28, BUDGET, interferer_powers=[1.0, 0.5])
    assert mixed == pytest.approx(0.28e-9 / (1e-10 + 1e-10 + noise))
    assert capacity(1.0, 1e8) == pytest.approx(1e8)
    assert capacity(0.0, 1e8) == 0.0
    with pytest.raises(InvalidParameterError):
        sinr(-1.0, [], 0.28, BUDGET)
    with pytest.raises(InvalidParameterError):
        sinr(1e-9, [1e-10], 0.28, BUDGET, interferer_powers=[1.0, 2.0])


def test_sinr_without_interference_is_snr():
    """Interference-free SINR is the plain SNR"""
    gain = channel_gain(81.05)
    assert sinr(gain, [], 0.28, BUDGET) == pytest.approx(0.28 * gain / noise_power_w(BUDGET))


def test_transmit_energy():
    """4096 bits at 100 Mbps and 280 mW"""
    assert transmit_energy(4096, 1e8, 0.28) == pytest.approx(TRANSMIT_ENERGY_J, rel=1e-9)
    with pytest.raises(ZeroCapacityError):
        transmit_energy(4096, 0.0, 0.28)


def test_propagation_delay_modes():
    """d/C by default, S/C + d/c in physical mode"""
    assert propagation_delay(300.0, 1e8, 4096) == pytest.approx(3e-6)
    physical = propagation_delay(300.0, 1e8, 4096, DelayMode.PHYSICAL)
    assert physical == pytest.approx(4096 / 1e8 + 1e-6)
    with pytest.raises(ZeroCapacityError):
        propagation_delay(300.0, 0.0, 4096)


def test_d2d_distance_and_loss():
    """D2D distance is 3D unless d2d_planar; coincident UAVs are degenerate"""
    a, b = (0.0, 0.0, 100.0), (30.0, 40.0, 100.0)
    assert uav_distance(a, b) == pytest.approx(50.0)
    assert uav_distance((0.0, 0.0, 100.0), (0.0, 0.0, 150.0)) == pytest.approx(50.0)
    assert uav_distance((0.0, 0.0, 100.0), (0.0, 0.0, 150.0), planar=True) == 0.0
    assert path_loss_d2d(a, b, BUDGET) == pytest.approx(free_space_loss(50.0, 2.4e9) + 1.0)
    with pytest.raises(DegenerateGeometryError):
        path_loss_d2d(a, a, BUDGET)
    planar = LinkBudget(d2d_planar=True)
    with pytest.raises(DegenerateGeometryError):
        path_loss_d2d((0.0, 0.0, 100.0), (0.0, 0.0, 150.0), planar)


def test_d2v_link_chain():
    """Path loss through energy for one ground link"""
    geometry = _overhead()
    result = d2v_link(geometry, BUDGET, BUDGET.transmit_power)
    assert result.distance == pytest.approx(100.0)
    assert result.gain == pytest.approx(channel_gain(result.path_loss))
    assert result.capacity == pytest.approx(BUDGET.bandwidth * math.log2(1 + result.sinr))
    assert result.energy == pytest.approx(4096 / result.capacity * 0.28)

    interfered = d2v_link(geometry, BUDGET, BUDGET.transmit_power, [result.gain / 10])
    assert interfered.sinr < result.sinr
    assert interfered.energy > result.energy


def test_d2d_link_interference():
    """Interferers lower D2D SINR without changing the path loss"""
    sender, receiver = (0.0, 0.0, 100.0), (200.0, 0.0, 120.0)
    clean = d2d_link(sender, receiver, BUDGET)
    noisy = d2d_link(sender, receiver, BUDGET, interferers=[(300.0, 0.0, 110.0)])
    assert clean.distance == pytest.approx(math.hypot(200.0, 20.0))
    assert noisy.sinr < clean.sinr
    assert noisy.path_loss == clean.path_loss


def test_los_probability_strictly_increases_with_elevation():
    """Higher elevation, more line of sight"""
    rng = np.random.default_rng(3)
    angles = np.unique(np.concatenate([np.linspace(0.0, 90.0, 901), rng.uniform(0.0, 90.0, 2000)]))
    values = [p_los(float(theta), 14.39, 0.13) for theta in angles]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_path_loss_strictly_increases_with_distance():
    """Fixed elevation, growing range: FSPL, D2V and D2D losses all grow"""
    rng = np.random.default_rng(4)
    distances = np.unique(rng.uniform(1.0, 5000.0, 2000))
    theta = math.radians(float(rng.uniform(5.0, 85.0)))
    fspl, mean_d2v, d2d = [], [], []
    for d in distances:
        d = float(d)
        geometry = LinkGeometry(0.0, 0.0, d * math.sin(theta), d * math.cos(theta), 0.0)
        fspl.append(free_space_loss(d, BUDGET.carrier_frequency))
        mean_d2v.append(mean_path_loss_d2v(geometry, BUDGET))
        d2d.append(path_loss_d2d((0.0, 0.0, 100.0), (d, 0.0, 100.0), BUDGET))
    for series in (fspl, mean_d2v, d2d):
        assert all(b > a for a, b in zip(series, series[1:]))


def test_capacity_strictly_increases_with_sinr():
    """Shannon capacity grows with every SINR increase"""
    rng = np.random.default_rng(5)
    ratios = np.unique(np.concatenate([[0.0], rng.uniform(0.0, 1e6, 2000), rng.uniform(0.0, 1.0, 500)]))
    rates = [capacity(float(r), BUDGET.bandwidth) for r in ratios]
    assert all(b > a for a, b in zip(rates, rates[1:]))


def test_adding_interferers_never_raises_sinr():
    """Each added interferer lowers or keeps the SINR"""
    rng = np.random.default_rng(6)
    for _ in range(200):
        signal = float(rng.uniform(1e-12, 1e-6))
        gains = []
        previous = sinr(signal, gains, 0.28, BUDGET)
        for _ in range(6):
            gains.append(float(rng.uniform(0.0, 1e-6)))
            current = sinr(signal, gains, 0.28, BUDGET)
            assert current <= previous
            previous = current


def test_equal_interferer_keeps_sinr_below_one():
    """An interferer as strong as the signal caps SINR under 0 dB"""
    rng = np.random.default_rng(9)
    for gain in rng.uniform(1e-14, 1e-3, 500):
        assert sinr(float(gain), [float(gain)], 0.28, BUDGET) < 1.0


def test_transmit_energy_times_rate_is_size_times_power():
    """(S/C) p times C gives back S p"""
    rng = np.random.default_rng(10)
    for _ in range(10_000):
        size = float(rng.uniform(1.0, 1e7))
        rate = float(rng.uniform(1e-3, 1e10))
        power = float(rng.uniform(1e-3, 10.0))
        assert transmit_energy(size, rate, power) * rate == pytest.approx(size * power, rel=1e-12)
