"""Independent oracles and golden values shared by the test modules."""

import math

# Link budget at f_c = 2.4 GHz
FSPL_100M_DB = 80.05
PATH_LOSS_LOS_100M_DB = 81.05
PATH_LOSS_NLOS_100M_DB = 100.05
P_LOS_AT_A = 1.0 / 15.39
P_LOS_AT_90 = 0.999226
GAIN_81_05_DB = 7.85e-9
TRANSMIT_ENERGY_J = 1.14688e-5          # 4096 bits at 1e8 bps and 0.28 W
NOISE_POWER_W = 10 ** (-9.4) / 1000     # -174 dBm/Hz over 100 MHz

# Propulsion, defaults
HOVER_POWER_W = 172.77
POWER_AT_10_MS_W = 130.40


def motion_power_oracle(v, p0=84.14, p1=88.63, u_tip=120.0, v0=4.03, d0=0.6, s=0.05, rho=1.225, area=0.503):
    """Rotary-wing power, written term by term."""
    blade_profile = p0 * (1 + 3 * v ** 2 / u_tip ** 2)
    induced = p1 * (math.sqrt(1 + v ** 4 / (4 * v0 ** 4)) - v ** 2 / (2 * v0 ** 2)) ** 0.5
    parasite = 0.5 * d0 * rho * s * area * v ** 3
    return blade_profile + induced + parasite


def ellipse_perimeter_oracle(a, b):
    """Ramanujan's first approximation."""
    return math.pi * (3 * (a + b) - math.sqrt((3 * a + b) * (a + 3 * b)))
