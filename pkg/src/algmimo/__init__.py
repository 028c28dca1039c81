"""Exact and numerical tools for algebraic MIMO random-matrix channels."""
from .exactalg import BiPoly, VarTag, normalize, resultant, substitute_rational
from .transforms import MomentSeries, moment_series, mz_to_muz, muz_to_mz, shannon_coefficients
from .channels import (
    AR1, AgramWish, Atoms, ChannelError, CompiledChannel, CorrWish, FreeMultiply, MP, Scale, Shift,
    compile_channel, mean_of,
)
from .parse import ParseError, parse_channel_expr
from .numerics import density, shannon_transform, shannon_series_eval, ergodic_capacity
from .montecarlo import McConfig, McEstimate, estimate

__all__ = [name for name in dir() if not name.startswith("_")]
