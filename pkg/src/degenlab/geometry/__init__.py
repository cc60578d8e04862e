from .core import (
    DegeneracyParams,
    Point,
    ScalingExponents,
    carre_du_champ,
    coefficient_weights,
    derived_exponents,
    distance_D,
    origin,
    piecewise_power,
    r_xi,
    scale_point,
)
from .regions import (
    Ball,
    Cube,
    HalfBall,
    HalfInterval,
    Interval,
    Region,
    ScaledBox,
    bounding_box,
    doubling_ratio,
    region_contains,
    region_radius,
    region_volume,
)
from .checks import (
    check_embeddings,
    check_intertwining,
    check_scaling_bounds,
    find_kappa,
)
