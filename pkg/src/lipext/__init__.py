"""Certified C1 extension and Lipschitz smoothing on subspaces of R^n."""

from .errors import ConfigError, ConstructionError, EvalError, LipextError, NetCapExceeded
from .space import (Box, Subspace, build_index, offset_region_net, project,
                    quotient_grad, quotient_norm, smooth_sup_norm, subspace_net)

__version__ = "0.1.0"
