//! Report envelopes and CSV emitters.
//!
//! Every artifact the command-line driver writes embeds the tool version
//! and the fully resolved configuration, so a report can be reproduced
//! from its own header. CSV payloads use fixed 12-digit scientific
//! formatting and fixed row order, making reruns byte-identical.

use serde::Serialize;

use crate::error::Result;
use crate::fiber::{gram_fiber_with, numerical_rank, SetGeometry};
use crate::genlib::GeneratorSet;
use crate::grid::GridSpec;
use crate::lattice::FundamentalDomain;

pub const TOOL_NAME: &str = "sislab";

/// Version string baked in at compile time.
pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a C,
    report: &'a P,
}

/// Serialize a payload wrapped with the tool identity and the resolved
/// configuration, pretty-printed with a trailing newline.
pub fn envelope_json<C: Serialize, P: Serialize>(config: &C, payload: &P) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope {
        tool: TOOL_NAME,
        version: tool_version(),
        config,
        report: payload,
    })?;
    s.push('\n');
    Ok(s)
}

/// Fixed-width scientific formatting used for every CSV cell.
pub fn fmt_e(x: f64) -> String {
    format!("{x:.12e}")
}

/// First line of every CSV artifact: tool, version, compact config echo.
pub fn csv_preamble<C: Serialize>(config: &C) -> Result<String> {
    Ok(format!(
        "# tool={} version={} config={}\n",
        TOOL_NAME,
        tool_version(),
        serde_json::to_string(config)?
    ))
}

/// Generic numeric table with one [`fmt_e`] cell per value.
pub fn table_csv<C: Serialize>(config: &C, headers: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut out = csv_preamble(config)?;
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_e(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// One Gramian fiber sample of the CSV spectrum dump.
pub struct FiberRow {
    pub omega: Vec<f64>,
    /// Eigenvalues in descending order.
    pub eigvals: Vec<f64>,
    pub rank: usize,
    pub trunc_error: f64,
}

/// Sample the Gramian fibers over one fundamental domain of the dual
/// lattice, in grid order.
pub fn gram_fiber_rows(set: &GeneratorSet, grid: GridSpec, tau: f64) -> Result<Vec<FiberRow>> {
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let geom = SetGeometry::new(set)?;
    let mut rows = Vec::new();
    for omega in grid.points(&domain)? {
        let m = gram_fiber_with(&geom, set, &omega)?;
        rows.push(FiberRow {
            rank: numerical_rank(&m, tau),
            eigvals: m.eigvals.clone(),
            trunc_error: m.trunc_error,
            omega: m.omega,
        });
    }
    Ok(rows)
}

/// CSV dump of fiber spectra: grid coordinates, descending eigenvalues,
/// numerical rank, truncation bound.
pub fn fibers_csv<C: Serialize>(
    config: &C,
    dim: usize,
    r: usize,
    rows: &[FiberRow],
) -> Result<String> {
    let mut out = csv_preamble(config)?;
    let mut headers: Vec<String> = (0..dim).map(|a| format!("omega_{a}")).collect();
    headers.extend((0..r).map(|i| format!("eig_{i}")));
    headers.push("rank".into());
    headers.push("trunc_error".into());
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in rows {
        let mut cells: Vec<String> = row.omega.iter().map(|&x| fmt_e(x)).collect();
        cells.extend(row.eigvals.iter().map(|&x| fmt_e(x)));
        cells.push(row.rank.to_string());
        cells.push(fmt_e(row.trunc_error));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}
