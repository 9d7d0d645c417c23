//! Exhaustive `(n, m, lambda)` exploration under cave bounds.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mass::{evaluate_design, DesignEvaluation, DesignInputs, MassError};
use crate::par::{map_collect, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep grid: {0}")]
    Grid(String),
    #[error("evaluation of (n={n}, m={m}, lambda={lambda}) failed: {source}")]
    Evaluation {
        n: u32,
        m: u32,
        lambda: f64,
        source: MassError,
    },
}

/// Inclusive integer ranges for `n` and `m`, and an evenly stepped
/// `lambda` interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub n_min: u32,
    pub n_max: u32,
    pub m_min: u32,
    pub m_max: u32,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            n_min: 3,
            n_max: 10,
            m_min: 2,
            m_max: 10,
            lambda_min: 0.51,
            lambda_max: 0.90,
            lambda_step: 0.01,
        }
    }
}

impl SweepGrid {
    pub fn single(n: u32, m: u32, lambda: f64) -> Self {
        Self {
            n_min: n,
            n_max: n,
            m_min: m,
            m_max: m,
            lambda_min: lambda,
            lambda_max: lambda,
            lambda_step: 0.01,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |msg: &str| Err(SweepError::Grid(msg.to_owned()));
        if self.n_min < 3 || self.n_max < self.n_min {
            return bad("need 3 <= n_min <= n_max");
        }
        if self.m_min < 1 || self.m_max < self.m_min {
            return bad("need 1 <= m_min <= m_max");
        }
        if !(self.lambda_step > 0.0) {
            return bad("lambda_step must be positive");
        }
        if !(self.lambda_min > 0.5 && self.lambda_max <= 1.0 && self.lambda_min <= self.lambda_max) {
            return bad("need 0.5 < lambda_min <= lambda_max <= 1");
        }
        Ok(())
    }

    /// Lambda values, rounded to 1e-9 so `0.51 + 32 * 0.01` prints as 0.83.
    pub fn lambdas(&self) -> Vec<f64> {
        let count = ((self.lambda_max - self.lambda_min) / self.lambda_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let l = self.lambda_min + i as f64 * self.lambda_step;
                (l * 1e9).round() / 1e9
            })
            .collect()
    }

    /// Grid points in lexicographic `(n, m, lambda)` order.
    pub fn points(&self) -> Vec<(u32, u32, f64)> {
        let lambdas = self.lambdas();
        let mut pts = Vec::with_capacity(self.cardinality());
        for n in self.n_min..=self.n_max {
            for m in self.m_min..=self.m_max {
                pts.extend(lambdas.iter().map(|&l| (n, m, l)));
            }
        }
        pts
    }

    pub fn cardinality(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
            * (self.m_max - self.m_min + 1) as usize
            * self.lambdas().len()
    }
}

/// Occurrences of one `(n, m)` pair among feasible configurations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRank {
    pub n: u32,
    pub m: u32,
    pub count: usize,
    /// Largest extra payload among the pair's feasible rows, g.
    pub best_payload_g: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub evaluations: Vec<DesignEvaluation>,
    /// Indices into `evaluations`.
    pub feasible: Vec<usize>,
    pub pair_occurrences: BTreeMap<(u32, u32), usize>,
    pub ranking: Vec<PairRank>,
}

impl SweepResult {
    /// Top-ranked pair, or `None` when nothing is feasible.
    pub fn best(&self) -> Option<&PairRank> {
        self.ranking.first()
    }

    pub fn feasible_evaluations(&self) -> impl Iterator<Item = &DesignEvaluation> {
        self.feasible.iter().map(|&i| &self.evaluations[i])
    }

    pub fn summary(&self) -> SweepSummary {
        SweepSummary {
            evaluated: self.evaluations.len(),
            feasible: self.feasible.len(),
            status: if self.feasible.is_empty() {
                "no_feasible_design"
            } else {
                "ok"
            },
            best: self.best().cloned(),
            ranking: self.ranking.clone(),
        }
    }

    /// One row per configuration, fixed precision, lexicographic order.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> io::Result<()> {
        for h in header {
            writeln!(w, "# {h}")?;
        }
        write!(w, "n,m,lambda,volume_m3,lift_g")?;
        if let Some(first) = self.evaluations.first() {
            for (name, _) in first.mass.parts() {
                write!(w, ",{name}_g")?;
            }
        }
        writeln!(
            w,
            ",calibration_g,total_g,extra_payload_g,deployed_height_mm,fits_height,fits_folded,feasible"
        )?;
        for e in &self.evaluations {
            write!(
                w,
                "{},{},{},{:.6},{:.4}",
                e.params.sides, e.params.segments, e.params.lambda, e.volume_deployed_m3, e.lift_g
            )?;
            for (_, g) in e.mass.parts() {
                write!(w, ",{g:.4}")?;
            }
            writeln!(
                w,
                ",{:.4},{:.4},{:.4},{:.3},{},{},{}",
                e.mass.calibration_g,
                e.mass.total_g,
                e.extra_payload_g,
                e.deployed_height_mm,
                e.fits_height,
                e.fits_folded,
                e.feasible
            )?;
        }
        Ok(())
    }

    /// `(n, m, lambda, feasible)` rows for external plotting.
    pub fn write_feasibility_map<W: Write>(&self, mut w: W, header: &[String]) -> io::Result<()> {
        for h in header {
            writeln!(w, "# {h}")?;
        }
        writeln!(w, "n,m,lambda,extra_payload_g,feasible")?;
        for e in &self.evaluations {
            writeln!(
                w,
                "{},{},{},{:.4},{}",
                e.params.sides,
                e.params.segments,
                e.params.lambda,
                e.extra_payload_g,
                u8::from(e.feasible)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub evaluated: usize,
    pub feasible: usize,
    pub status: &'static str,
    pub best: Option<PairRank>,
    pub ranking: Vec<PairRank>,
}

pub fn run_sweep(inputs: &DesignInputs, grid: &SweepGrid) -> Result<SweepResult, SweepError> {
    run_sweep_with(inputs, grid, Execution::default())
}

pub fn run_sweep_with(
    inputs: &DesignInputs,
    grid: &SweepGrid,
    exec: Execution,
) -> Result<SweepResult, SweepError> {
    grid.validate()?;
    let points = grid.points();
    let evaluations = map_collect(&points, exec, |&(n, m, lambda)| {
        evaluate_design(inputs, n, m, lambda)
            .map_err(|source| SweepError::Evaluation { n, m, lambda, source })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let feasible: Vec<usize> = evaluations
        .iter()
        .enumerate()
        .filter(|(_, e)| e.feasible)
        .map(|(i, _)| i)
        .collect();
    let mut pair_occurrences = BTreeMap::new();
    for &i in &feasible {
        let p = &evaluations[i].params;
        *pair_occurrences.entry((p.sides, p.segments)).or_insert(0) += 1;
    }
    let mut result = SweepResult {
        evaluations,
        feasible,
        pair_occurrences,
        ranking: Vec::new(),
    };
    result.ranking = rank_pairs(&result);
    Ok(result)
}

/// Pairs by descending feasible count; ties go to the larger best payload,
/// then the smaller `n`, then the smaller `m`.
pub fn rank_pairs(result: &SweepResult) -> Vec<PairRank> {
    let mut by_pair: BTreeMap<(u32, u32), PairRank> = BTreeMap::new();
    for e in result.feasible_evaluations() {
        let p = &e.params;
        let entry = by_pair.entry((p.sides, p.segments)).or_insert(PairRank {
            n: p.sides,
            m: p.segments,
            count: 0,
            best_payload_g: f64::NEG_INFINITY,
            lambda_min: f64::INFINITY,
            lambda_max: f64::NEG_INFINITY,
        });
        entry.count += 1;
        entry.best_payload_g = entry.best_payload_g.max(e.extra_payload_g);
        entry.lambda_min = entry.lambda_min.min(p.lambda);
        entry.lambda_max = entry.lambda_max.max(p.lambda);
    }
    let mut ranking: Vec<PairRank> = by_pair.into_values().collect();
    ranking.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(b.best_payload_g.total_cmp(&a.best_payload_g))
            .then(a.n.cmp(&b.n))
            .then(a.m.cmp(&b.m))
    });
    ranking
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_cardinality() {
        let g = SweepGrid::default();
        assert_eq!(g.lambdas().len(), 40);
        assert_eq!(g.cardinality(), 2880);
        assert_eq!(g.points().len(), 2880);
        assert_eq!(g.lambdas()[32], 0.83);
        assert_eq!(*g.lambdas().last().unwrap(), 0.9);
    }

    #[test]
    fn grid_validation() {
        let mut g = SweepGrid::default();
        g.lambda_min = 0.5;
        assert!(g.validate().is_err());
        let g = SweepGrid {
            n_min: 2,
            ..SweepGrid::default()
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn singleton_sweep_matches_evaluation() {
        let inputs = DesignInputs::default();
        let r = run_sweep(&inputs, &SweepGrid::single(7, 4, 0.9)).unwrap();
        assert_eq!(r.evaluations.len(), 1);
        assert_eq!(r.evaluations[0], evaluate_design(&inputs, 7, 4, 0.9).unwrap());
    }

    #[test]
    fn nothing_floats_without_lift_gas() {
        let inputs = DesignInputs {
            rho_helium_kg_m3: 1.231,
            ..DesignInputs::default()
        };
        let grid = SweepGrid {
            n_min: 6,
            n_max: 8,
            m_min: 3,
            m_max: 5,
            ..SweepGrid::default()
        };
        let r = run_sweep(&inputs, &grid).unwrap();
        assert!(r.feasible.is_empty());
        assert!(r.best().is_none());
        assert!(rank_pairs(&r).is_empty());
        assert_eq!(r.summary().status, "no_feasible_design");
    }
}
