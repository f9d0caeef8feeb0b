"""Runs (maximal repetitions) in strings and empirical checks of their structure."""

from .delta import (
    CenterFamily,
    PairCase,
    are_delta_close,
    audit_three_close,
    bucket_deltas,
    classify_pair,
    count_bound,
    shared_center_families,
    verify_case_i_start,
    verify_case_vi_gap,
)
from .exponents import (
    audit_exponent_window,
    check_no_two_fat,
    exp_bound,
    overlap_bound,
    sum_of_exponents,
)
from .explorer import (
    density_table,
    exhaustive_sweep,
    fibonacci_word,
    random_sweep,
    three_square_scan,
)
from .lce import LceIndex, build_lce
from .report import AuditReport
from .runs import Run, RunSet, enumerate_runs_fast, enumerate_runs_oracle, square_of
from .strings import (
    check_fine_wilf,
    exponent_of,
    is_primitive,
    occurrences_in_square,
    primitive_root,
    smallest_period,
)

__version__ = "0.1.0"
