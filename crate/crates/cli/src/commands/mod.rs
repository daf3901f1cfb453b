pub mod density;
pub mod exit_time;
pub mod limits;
pub mod sample;
pub mod spectral;
pub mod verify;

use spider_bm::SpiderPoint;

use crate::config::Resolved;
use crate::error::CliResult;
use crate::table::{destination, write_table, Cell, Table};

/// Leg of a point for output, with 0 marking the origin.
pub(crate) fn leg_cell(p: &SpiderPoint) -> Cell {
    Cell::Int(if p.is_origin() { 0 } else { p.leg() as i64 })
}

pub(crate) fn finish<P>(table: &Table, command: &str, r: &Resolved<P>) -> CliResult<bool> {
    let dest = destination(r.output.as_deref(), command, r.format);
    write_table(table, command, r.format, dest.as_deref())?;
    Ok(true)
}
