//! Shared fixtures for the kernel benchmarks.

use adiab_core::models::{lz_superop, LzParams};
use adiab_core::superop::SuperoperatorFn;

pub fn paper_lz_superop() -> SuperoperatorFn {
    lz_superop(&LzParams::resonant_preset(1256.0)).expect("valid parameters")
}
