"""Core-agent orchestration, descriptor classification and leader election."""

try:
    from umf._umf import (
        Gateway,
        MemoryStore,
        UmfError,
        audit,
        audit_file,
        audit_text,
        check_prompt,
        elect,
        filter_egress,
        plan,
        run_scenario,
        run_scenario_file,
    )
except ImportError:  # in-tree build: _umf sits next to the package, not inside it
    from _umf import (  # type: ignore[no-redef]
        Gateway,
        MemoryStore,
        UmfError,
        audit,
        audit_file,
        audit_text,
        check_prompt,
        elect,
        filter_egress,
        plan,
        run_scenario,
        run_scenario_file,
    )

__all__ = [
    "Gateway",
    "MemoryStore",
    "UmfError",
    "audit",
    "audit_file",
    "audit_text",
    "check_prompt",
    "elect",
    "filter_egress",
    "plan",
    "run_scenario",
    "run_scenario_file",
]
