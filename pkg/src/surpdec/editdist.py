"""Character edit distance, served by the compiled kernel when available.

`KERNEL` records which implementation was selected at import time
("compiled" or "pure-python").  Set SURPDEC_PURE_KERNEL=1 to force the
pure-Python fallback; `benchmarks/bench_editdist.py` times the two
against each other.
"""

import os

if os.environ.get("SURPDEC_PURE_KERNEL"):
    from surpdec._editdist_py import char_dl_distance, char_dl_distance_many

    KERNEL = "pure-python"
else:
    try:
        from surpdec._editdist import char_dl_distance, char_dl_distance_many

        KERNEL = "compiled"
    except ImportError:
        from surpdec._editdist_py import char_dl_distance, char_dl_distance_many

        KERNEL = "pure-python"

__all__ = ["char_dl_distance", "char_dl_distance_many", "KERNEL"]
