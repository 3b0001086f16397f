"""Control Network Programming runtime.

    >>> import cnp
    >>> net = cnp.parse(open("program.cn").read())
    >>> reg = cnp.Registry()
    >>> reg.load_manifest("manifest.toml")
    >>> cnp.run(net, reg, vars={"Monkey": "Door", "Box": "Door"})["count"]
    2
"""

from ._cnp import (
    Call,
    CnpError,
    LoadError,
    ManifestError,
    Network,
    NonPositiveInput,
    ParseError,
    PlaceholderOutOfRange,
    Registry,
    Session,
    SpawnError,
    ValidationError,
    classify_bmi,
    format_bmi,
    parse,
    render_command,
    run,
    run_sync,
    scratch_append_step,
    scratch_pop_step,
    scratch_read_positions,
    scratch_read_steps,
    scratch_write_positions,
    split_command,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
