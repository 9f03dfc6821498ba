"""Hot-kernel dispatch: JIT (numba) or pure numpy, per POINTGOF_BACKEND."""

from .._backend import ACTIVE_BACKEND
from .common import (  # noqa: F401
    AREA_GRID_RES,
    CORR_BORDER,
    CORR_ISOTROPIC,
    CORR_NONE,
    CORR_RIGID,
    CORR_TRANSLATION,
    FAM_AREA,
    FAM_HARDKBALL,
    FAM_PAIR,
    build_cell_index,
)

if ACTIVE_BACKEND == "numba":
    from . import numba_impl as impl
else:
    from . import python_impl as impl

pair_weight_bins = impl.pair_weight_bins
pcf_bins = impl.pcf_bins
nn_diff_bins = impl.nn_diff_bins
gibbs_domain = impl.gibbs_domain
clan_probe = impl.clan_probe
