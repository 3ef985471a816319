//! Transition-sequence classification: the closed-form force rule, the
//! path-following oracle, anchor-position sweeps and their comparison.
//!
//! Because each unit's reaction force decreases monotonically along its
//! travel, the order in which the two units leave their stop states is fixed
//! by the four boundary forces `F0 = F(-theta_c)` and `F1 = F(theta_c)`: the
//! unit with the smaller `F0` yields first on loading, the unit with the
//! larger `F1` yields first on unloading.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::chain::{
    run_protocol, ChainConfig, DiscreteState, LoadProtocol, SolverParams, S00, S01, S10, S11,
};
use crate::error::ChainError;
use crate::unit::{classify_stability, unit_force, Vec2Mm};

/// Reaction forces of both units at their stop states (N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSignature {
    pub f0_in: f64,
    pub f1_in: f64,
    pub f0_out: f64,
    pub f1_out: f64,
}

/// Evaluate the four boundary forces of a chain.
pub fn force_signature(cfg: &ChainConfig) -> Result<ForceSignature, crate::ModelError> {
    Ok(ForceSignature {
        f0_in: unit_force(-cfg.inner.theta_c, &cfg.inner)?,
        f1_in: unit_force(cfg.inner.theta_c, &cfg.inner)?,
        f0_out: unit_force(-cfg.outer.theta_c, &cfg.outer)?,
        f1_out: unit_force(cfg.outer.theta_c, &cfg.outer)?,
    })
}

/// The four supported transition sequences of a full loading cycle, plus the
/// tie case. "Via" names the intermediate state shared by both half-cycles of
/// an undirected sequence; "through ... first" names the first intermediate
/// state of a directed cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceClass {
    /// 00 -> 01 -> 11 -> 01 -> 00
    UndirectedVia01,
    /// 00 -> 10 -> 11 -> 10 -> 00
    UndirectedVia10,
    /// 00 -> 10 -> 11 -> 01 -> 00 (forward step when mounted on a leg)
    DirectedThrough10First,
    /// 00 -> 01 -> 11 -> 10 -> 00 (backward step when mounted on a leg)
    DirectedThrough01First,
    /// Within tie tolerance of a class boundary, or an unrecognised path.
    Degenerate,
}

impl SequenceClass {
    /// Compact code used in serialised diagrams.
    pub fn code(&self) -> &'static str {
        match self {
            SequenceClass::UndirectedVia01 => "u01",
            SequenceClass::UndirectedVia10 => "u10",
            SequenceClass::DirectedThrough10First => "d10",
            SequenceClass::DirectedThrough01First => "d01",
            SequenceClass::Degenerate => "deg",
        }
    }

    pub fn is_directed(&self) -> bool {
        matches!(
            self,
            SequenceClass::DirectedThrough10First | SequenceClass::DirectedThrough01First
        )
    }

    pub fn is_undirected(&self) -> bool {
        matches!(
            self,
            SequenceClass::UndirectedVia01 | SequenceClass::UndirectedVia10
        )
    }
}

impl fmt::Display for SequenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Classify from boundary forces. Any comparison within `tie_tol` (N) is a tie.
pub fn classify_by_forces(sig: &ForceSignature, tie_tol: f64) -> SequenceClass {
    let d0 = sig.f0_in - sig.f0_out;
    let d1 = sig.f1_in - sig.f1_out;
    if d0.abs() <= tie_tol || d1.abs() <= tie_tol {
        return SequenceClass::Degenerate;
    }
    match (d0 > 0.0, d1 > 0.0) {
        (true, true) => SequenceClass::UndirectedVia01,
        (false, false) => SequenceClass::UndirectedVia10,
        (false, true) => SequenceClass::DirectedThrough10First,
        (true, false) => SequenceClass::DirectedThrough01First,
    }
}

/// Default tie tolerance (N): below experimentally meaningful force
/// resolution, above solver noise.
pub const TIE_TOL: f64 = 1e-3;

/// Map a visited sequence to its class; anything but the four canonical
/// five-state cycles is degenerate.
pub fn classify_sequence(seq: &[DiscreteState]) -> SequenceClass {
    if seq == [S00, S01, S11, S01, S00] {
        SequenceClass::UndirectedVia01
    } else if seq == [S00, S10, S11, S10, S00] {
        SequenceClass::UndirectedVia10
    } else if seq == [S00, S10, S11, S01, S00] {
        SequenceClass::DirectedThrough10First
    } else if seq == [S00, S01, S11, S10, S00] {
        SequenceClass::DirectedThrough01First
    } else {
        SequenceClass::Degenerate
    }
}

/// Classify by actually sweeping a full loading/unloading cycle.
pub fn classify_by_path(cfg: &ChainConfig, solver: &SolverParams) -> Result<SequenceClass, ChainError> {
    let path = run_protocol(cfg, &LoadProtocol::full_cycle(cfg), solver)?;
    Ok(classify_sequence(&path.sequence))
}

/// Uniformly spaced sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        AxisSpec { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// Who produced a diagram's class labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Boundary-force rule.
    Rule,
    /// Path-following simulation.
    Oracle,
}

/// Outcome of one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum CellOutcome {
    Class(SequenceClass),
    Failed(String),
}

impl CellOutcome {
    pub fn class(&self) -> Option<SequenceClass> {
        match self {
            CellOutcome::Class(c) => Some(*c),
            CellOutcome::Failed(_) => None,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CellOutcome::Class(c) => c.code(),
            CellOutcome::Failed(_) => "err",
        }
    }
}

/// Grid of sequence classes over the outer anchor position.
///
/// Cells are stored row-major: index `iy * qx.len() + ix` with `qy` rows and
/// `qx` columns, both axes ascending as specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub qx_mm: Vec<f64>,
    pub qy_mm: Vec<f64>,
    pub provenance: Provenance,
    pub cells: Vec<CellOutcome>,
    /// Whether the outer unit alone is monostable at each cell.
    pub monostable_outer: Vec<bool>,
}

impl PhaseDiagram {
    pub fn cell(&self, ix: usize, iy: usize) -> &CellOutcome {
        &self.cells[iy * self.qx_mm.len() + ix]
    }

    /// Cell of the grid point nearest to `(qx, qy)`.
    pub fn cell_near(&self, qx: f64, qy: f64) -> &CellOutcome {
        let nearest = |axis: &[f64], v: f64| {
            axis.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - v).abs().partial_cmp(&(b.1 - v).abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap()
        };
        self.cell(nearest(&self.qx_mm, qx), nearest(&self.qy_mm, qy))
    }
}

/// Default sweep grid covering all reference outer-anchor choices:
/// `q_x in [0, 20] mm (41 cells)`, `q_y in [-15, 15] mm (31 cells)`.
pub fn default_grid() -> (AxisSpec, AxisSpec) {
    (AxisSpec::new(0.0, 20.0, 41), AxisSpec::new(-15.0, 15.0, 31))
}

/// Sweep the outer anchor over a grid and classify every cell.
///
/// Cells are independent and evaluated in parallel; assembly order is fixed
/// by the grid indices. Per-cell solver failures are recorded in the cell and
/// the sweep continues.
pub fn sweep_qout(
    base: &ChainConfig,
    qx: &AxisSpec,
    qy: &AxisSpec,
    provenance: Provenance,
    solver: &SolverParams,
    tie_tol: f64,
) -> PhaseDiagram {
    let qxv = qx.values();
    let qyv = qy.values();
    let indices: Vec<(usize, usize)> = (0..qyv.len())
        .flat_map(|iy| (0..qxv.len()).map(move |ix| (ix, iy)))
        .collect();

    let results: Vec<(CellOutcome, bool)> = indices
        .par_iter()
        .map(|&(ix, iy)| {
            let mut cfg = base.clone();
            cfg.outer.q = Vec2Mm::new(qxv[ix], qyv[iy]);
            let mono = classify_stability(&cfg.outer)
                .map(|r| !r.bistable)
                .unwrap_or(false);
            let outcome = match provenance {
                Provenance::Rule => match force_signature(&cfg) {
                    Ok(sig) => CellOutcome::Class(classify_by_forces(&sig, tie_tol)),
                    Err(e) => CellOutcome::Failed(e.to_string()),
                },
                Provenance::Oracle => match classify_by_path(&cfg, solver) {
                    Ok(c) => CellOutcome::Class(c),
                    Err(e) => CellOutcome::Failed(e.to_string()),
                },
            };
            (outcome, mono)
        })
        .collect();

    let (cells, monostable_outer) = results.into_iter().unzip();
    PhaseDiagram {
        qx_mm: qxv,
        qy_mm: qyv,
        provenance,
        cells,
        monostable_outer,
    }
}

/// Per-cell agreement between two diagrams on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub cells: usize,
    /// Cells where both sides produced a non-degenerate class.
    pub compared: usize,
    pub matches: usize,
    /// `matches / compared`, absent when nothing was comparable.
    pub agreement: Option<f64>,
    pub excluded_ties: usize,
    pub failed: usize,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub qx_mm: f64,
    pub qy_mm: f64,
    pub rule: SequenceClass,
    pub oracle: SequenceClass,
}

/// Compare two diagrams cell by cell, excluding ties and failures.
pub fn compare(rule: &PhaseDiagram, oracle: &PhaseDiagram) -> Result<AgreementReport, ChainError> {
    if rule.qx_mm != oracle.qx_mm || rule.qy_mm != oracle.qy_mm {
        return Err(ChainError::InvalidProtocol {
            reason: "phase diagrams use different grids".to_string(),
        });
    }
    let mut compared = 0;
    let mut matches = 0;
    let mut ties = 0;
    let mut failed = 0;
    let mut mismatches = Vec::new();
    for iy in 0..rule.qy_mm.len() {
        for ix in 0..rule.qx_mm.len() {
            match (rule.cell(ix, iy).class(), oracle.cell(ix, iy).class()) {
                (Some(a), Some(b)) => {
                    if a == SequenceClass::Degenerate || b == SequenceClass::Degenerate {
                        ties += 1;
                    } else {
                        compared += 1;
                        if a == b {
                            matches += 1;
                        } else {
                            mismatches.push(Mismatch {
                                qx_mm: rule.qx_mm[ix],
                                qy_mm: rule.qy_mm[iy],
                                rule: a,
                                oracle: b,
                            });
                        }
                    }
                }
                _ => failed += 1,
            }
        }
    }
    Ok(AgreementReport {
        cells: rule.cells.len(),
        compared,
        matches,
        agreement: (compared > 0).then(|| matches as f64 / compared as f64),
        excluded_ties: ties,
        failed,
        mismatches,
    })
}
