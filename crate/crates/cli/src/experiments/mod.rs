//! Figure reproductions and the bounds report.

mod bounds;
mod fig2;
mod fig3;
mod fig4;
pub mod fig5;

use riscap_core::mc::mix64;

use crate::config::{ExperimentKind, Settings};
use crate::error::CliError;
use crate::output::{Plot, Table};

pub struct Output {
    pub table: Table,
    pub plot: Plot,
}

pub fn run(s: &Settings) -> Result<Output, CliError> {
    match s.kind {
        ExperimentKind::Fig2Deltas => fig2::run(s),
        ExperimentKind::Fig3HsmCapacity => fig3::run(s),
        ExperimentKind::Fig4RateVsSnr => fig4::run(s),
        ExperimentKind::Fig5RateGainVsN => fig5::run(s),
        ExperimentKind::CustomBounds => bounds::run(s),
    }
}

/// Seed tag for a grid cell.
pub(crate) fn tag(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| mix64(acc ^ p.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub(crate) fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Invariant(msg()))
    }
}

/// `a <= b` up to rounding.
pub(crate) fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * b.abs().max(1.0)
}
