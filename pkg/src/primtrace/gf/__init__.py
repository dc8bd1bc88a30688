from .basefield import PolyField, PrimeField, TableField, make_base_field
from .chains import batch_pow_chain, naive_cost, plan_chain
from .cubic import CubicField
from .tower import (FieldTower, build_tower, find_primitive_root_base,
                    is_primitive_root_base, make_rng, primitive_roots_base)

__all__ = [
    "PolyField", "PrimeField", "TableField", "make_base_field",
    "batch_pow_chain", "naive_cost", "plan_chain", "CubicField",
    "FieldTower", "build_tower", "find_primitive_root_base",
    "is_primitive_root_base", "make_rng", "primitive_roots_base",
]
