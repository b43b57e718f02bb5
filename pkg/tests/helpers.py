from fctlp.fluxes import constant_velocity
from fctlp.grid import build_uniform_grid, face_topology
from fctlp.operators import LinearDiscretization
from fctlp.schemas import BoundarySpec


def make_advection(n: int = 4, length: float = 4.0, u: float = 1.0, bc: BoundarySpec = None,
                   k: float = 0.0, high: str = "centered") -> LinearDiscretization:
    """Linear advection on [0, length] with n uniform cells"""
    bc = bc or BoundarySpec(kind="periodic")
    grid = build_uniform_grid(0.0, length, n)
    return LinearDiscretization(face_topology(grid, bc), constant_velocity(u), k, high)
