"""Goal-oriented push/pull random access over an ISAC-capable cell-free network."""

from ._core import (
    ConfigError,
    Policy,
    Schedule,
    SimConfig,
    SingularGeometry,
    UeDemand,
    Undeliverable,
    Unidentifiable,
    emit_peb_map,
    outcome_pmf,
    peb_from_fim,
    q_loc,
    run_campaign,
    run_sweep,
    schedule_exact,
    schedule_heuristic,
    schedule_voi_blind,
    simulate_push,
    single_re_peb,
    success_count_distribution,
    tx_count_pmf,
    uatf_se,
    worst_case_position,
)

__all__ = [name for name in dir() if not name.startswith("_")]
