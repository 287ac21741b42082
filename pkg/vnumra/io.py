from vnumra._core.formats import (
    load_bank,
    load_mask,
    load_pyramid,
    load_signal,
    load_system,
    read_signal_csv,
    read_vnmr,
    save_bank,
    save_mask,
    save_pyramid,
    save_system,
    write_signal_csv,
    write_vnmr,
)

__all__ = (
    "load_bank",
    "load_mask",
    "load_pyramid",
    "load_signal",
    "load_system",
    "read_signal_csv",
    "read_vnmr",
    "save_bank",
    "save_mask",
    "save_pyramid",
    "save_system",
    "write_signal_csv",
    "write_vnmr",
)
