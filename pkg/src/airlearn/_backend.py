"""Import-time selection between the compiled kernels and the numpy fallback.

Set ``AIRLEARN_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("AIRLEARN_PURE_PYTHON", "") not in ("", "0"):
    from . import _fallback as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        from . import _fallback as _impl

BACKEND = _impl.NAME
sym_rank1_update = _impl.sym_rank1_update
accumulate_rows = _impl.accumulate_rows
