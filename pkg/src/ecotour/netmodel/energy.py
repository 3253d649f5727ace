import math
from dataclasses import dataclass

JOULES_PER_KWH = 3.6e6


@dataclass(frozen=True)
class EnergyParams:
    """Vehicle and environment constants of the longitudinal force model.

    Defaults describe a loaded electric delivery van on a calm day.
    """

    mass: float = 27216.0              # kg
    rolling_inertia_mass: float = 0.0  # kg, fictive mass for rotating parts
    rolling_coeff: float = 0.0058
    air_density: float = 1.1           # kg/m^3
    drag_coeff: float = 0.6
    frontal_area: float = 5.4          # m^2
    wind_speed: float = 0.0            # m/s
    gravity: float = 9.8               # m/s^2
    acceleration: float = 0.0          # m/s^2
    regen_efficiency: float = 0.7

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
        if self.regen_efficiency > 1:
            raise ValueError("regen_efficiency must not exceed 1")


def traction_force(params, speed, gradient):
    """Net longitudinal force in newtons."""
    p = params
    grade = p.mass * p.gravity * (p.rolling_coeff * math.cos(gradient) + math.sin(gradient))
    drag = 0.5 * p.air_density * p.drag_coeff * p.frontal_area * (speed + p.wind_speed) ** 2
    inertia = (p.mass + p.rolling_inertia_mass) * p.acceleration
    return grade + drag + inertia


def edge_energy(length, params=None, speed=0.0, gradient=0.0):
    """Energy in kWh to drive `length` metres at constant `speed` on slope `gradient` (rad).

    Negative results (downhill recuperation) are scaled by the regenerative
    efficiency.
    """
    if length < 0:
        raise ValueError("length must be non-negative")
    if speed < 0:
        raise ValueError("speed must be non-negative")
    params = params or EnergyParams()
    joules = traction_force(params, speed, gradient) * length
    if joules < 0:
        joules *= params.regen_efficiency
    return joules / JOULES_PER_KWH
