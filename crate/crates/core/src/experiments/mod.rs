//! Monte Carlo sweeps over `N` and `ε`, and the `‖u‖`-block decay study.
//!
//! Every sample is an independent task keyed by `(seed, N, index)`, so a sweep
//! gives the same report whether it runs on one thread or many. Random `g`
//! and `h` are drawn once per experiment and held fixed across `N`.

mod config;
mod report;
mod stats;

use std::time::Instant;

use rayon::prelude::*;

use crate::blockmat::BlockMatrix;
use crate::cosets::{circ_n, CosetTarget, FamilyKind, GroupFamily, TauDraw};
use crate::error::{CosetError, Result};
use crate::geometry::{dist_conjugacy, dist_double_coset, dist_to_product, sym_membership, DistanceOptions};
use crate::haar::{haar_orthogonal, top_block, RandomStream};

pub use config::{DistanceMethod, ExperimentConfig, MatrixSource};
pub use report::{
    write_report, BlockDecayReport, BlockDecayRow, ConcentrationReport, ReportFormat, ReportRow, CSV_COLUMNS,
};
pub use stats::{mean, median, wilson_interval};

/// Slack allowed when a witness is re-evaluated against its reported bound.
pub const VERIFY_TOL: f64 = 1e-9;

/// Stream index of sample `idx` at tail size `n`.
pub fn sample_stream(n: usize, idx: usize) -> u64 {
    ((n as u64) << 32) | idx as u64
}

/// Streams reserved for drawing `g` and `h`.
pub const G_STREAM: u64 = u64::MAX - 1;
pub const H_STREAM: u64 = u64::MAX - 2;

/// Resolves `g_spec` and `h_spec` of `cfg` to elements of `U(α + mk)`.
pub fn resolve_inputs(cfg: &ExperimentConfig) -> Result<(BlockMatrix<f64>, BlockMatrix<f64>)> {
    let spec = cfg.base_family()?.spec;
    let g = cfg.g_spec.resolve(cfg.family, spec, RandomStream::new(cfg.seed, G_STREAM))?;
    let h = cfg.h_spec.resolve(cfg.family, spec, RandomStream::new(cfg.seed, H_STREAM))?;
    Ok((g, h))
}

/// Distance of one sample to the target. For the symmetric family this is
/// `0.0` on exact membership and `1.0` otherwise.
#[derive(Debug, Clone, Copy)]
struct Outcome {
    distance: f64,
    exact: bool,
}

struct Cell<'a> {
    cfg: &'a ExperimentConfig,
    family: GroupFamily,
    g: &'a BlockMatrix<f64>,
    h: &'a BlockMatrix<f64>,
    target: CosetTarget<f64>,
    opts: DistanceOptions,
}

impl Cell<'_> {
    fn sample(&self, idx: usize) -> Result<Outcome> {
        let n = self.family.spec.n_tail;
        let mut rng = RandomStream::new(self.cfg.seed, sample_stream(n, idx)).rng();
        let draw = TauDraw::<f64>::draw(self.cfg.measure, &self.family, &mut rng);
        if self.family.kind == FamilyKind::Symmetric {
            let x = draw.assemble(self.g, self.h, &self.family)?;
            let perm = x.exact_permutation().ok_or(CosetError::NotPermutation)?;
            let member = sym_membership(perm, &self.target)?;
            return Ok(Outcome {
                distance: if member { 0.0 } else { 1.0 },
                exact: member,
            });
        }
        let (est, x) = match self.cfg.distance_method {
            DistanceMethod::Reduced => (dist_to_product(&draw, self.g, self.h, &self.family, &self.opts)?, None),
            DistanceMethod::Direct => {
                let x = draw.assemble(self.g, self.h, &self.family)?;
                let est = match self.family.kind {
                    FamilyKind::UnitaryConjugation => dist_conjugacy(&x, &self.target, &self.opts)?,
                    _ => dist_double_coset(&x, &self.target, &self.opts)?,
                };
                (est, Some(x))
            }
        };
        let max_eps = self.cfg.epsilon_list.iter().copied().fold(0.0, f64::max);
        if self.cfg.verify_witnesses && est.upper_bound <= max_eps {
            let x = match x {
                Some(x) => x,
                None => draw.assemble(self.g, self.h, &self.family)?,
            };
            let actual = est.evaluate(&x, &self.target)?;
            if actual > est.upper_bound + VERIFY_TOL {
                return Err(CosetError::Verification(format!(
                    "N = {n}, sample {idx}: witness gives {actual:e}, bound claims {:e}",
                    est.upper_bound
                )));
            }
        }
        Ok(Outcome {
            distance: est.upper_bound,
            exact: false,
        })
    }
}

/// Runs the sweep described by `cfg`: one row per `(N, ε)` in config order.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<ConcentrationReport> {
    cfg.validate()?;
    let base = cfg.base_family()?;
    let (g, h) = resolve_inputs(cfg)?;
    let mut report = ConcentrationReport::default();
    for &n in &cfg.n_list {
        let started = Instant::now();
        let family = base.with_tail(n);
        let cell = Cell {
            cfg,
            family,
            g: &g,
            h: &h,
            target: circ_n(&g, &h, family.spec, family.kind)?,
            opts: cfg.options(),
        };
        let outcomes = (0..cfg.samples)
            .into_par_iter()
            .map(|idx| cell.sample(idx))
            .collect::<Result<Vec<_>>>()?;
        let runtime_s = if cfg.record_runtime {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let distances: Vec<f64> = outcomes.iter().map(|o| o.distance).collect();
        let median_dist = median(&distances);
        let mean_dist = mean(&distances);
        for &epsilon in &cfg.epsilon_list {
            let hits = if family.kind == FamilyKind::Symmetric {
                outcomes.iter().filter(|o| o.exact).count()
            } else {
                outcomes.iter().filter(|o| o.distance <= epsilon).count()
            };
            let (ci_low, ci_high) = wilson_interval(hits, cfg.samples, 0.95);
            report.rows.push(ReportRow {
                family: cfg.family,
                alpha: cfg.alpha,
                k: cfg.k,
                m: cfg.m,
                n,
                epsilon,
                samples: cfg.samples,
                hits,
                fraction: hits as f64 / cfg.samples as f64,
                ci_low,
                ci_high,
                median_dist,
                mean_dist,
                seed: cfg.seed,
                runtime_s,
            });
        }
    }
    Ok(report)
}

/// Median and mean operator norm of the top `k×k` block of Haar `O(k+N)`.
pub fn run_block_decay(k: usize, n_list: &[usize], samples: usize, seed: u64) -> Result<BlockDecayReport> {
    if samples < 30 {
        return Err(CosetError::Config(format!("block decay needs at least 30 samples, got {samples}")));
    }
    if k == 0 {
        return Err(CosetError::Config("k must be positive".into()));
    }
    let mut report = BlockDecayReport::default();
    for &n in n_list {
        let norms = (0..samples)
            .into_par_iter()
            .map(|idx| {
                let mut rng = RandomStream::new(seed, sample_stream(n, idx)).rng();
                let o = haar_orthogonal::<f64, _>(k + n, &mut rng);
                let u = top_block(&o, k)?;
                Ok(u.singular_values().max())
            })
            .collect::<Result<Vec<f64>>>()?;
        report.rows.push(BlockDecayRow {
            k,
            n,
            samples,
            median_norm: median(&norms),
            mean_norm: mean(&norms),
            seed,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosets::Measure;

    fn cfg(family: FamilyKind, n_list: Vec<usize>, samples: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(family, 1, 1, 1);
        c.n_list = n_list;
        c.epsilon_list = vec![0.1, 0.4];
        c.samples = samples;
        c.seed = 9;
        c
    }

    #[test]
    fn identity_inputs_always_hit() {
        for family in [FamilyKind::Symmetric, FamilyKind::UnitaryOrthogonal, FamilyKind::UnitaryConjugation] {
            let c = cfg(family, vec![2, 5], 12);
            let report = run_concentration(&c).unwrap();
            assert_eq!(report.rows.len(), 4);
            for row in &report.rows {
                assert_eq!(row.hits, row.samples, "{family} N={}", row.n);
                assert!(row.ci_low <= row.fraction && row.fraction <= row.ci_high);
            }
        }
    }

    #[test]
    fn reports_are_reproducible_and_thread_independent() {
        let mut c = cfg(FamilyKind::UnitaryOrthogonal, vec![4, 9], 10);
        c.g_spec = MatrixSource::RandomUnitary;
        c.h_spec = MatrixSource::RandomUnitary;
        c.measure = Measure::TauFull;
        let a = run_concentration(&c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_concentration(&c)).unwrap();
        assert_eq!(
            a.render(ReportFormat::Csv).unwrap(),
            b.render(ReportFormat::Csv).unwrap()
        );
    }

    #[test]
    fn reduced_and_direct_agree_with_verified_witnesses() {
        let mut c = cfg(FamilyKind::UnitaryOrthogonal, vec![6], 8);
        c.g_spec = MatrixSource::RandomUnitary;
        c.h_spec = MatrixSource::RandomUnitary;
        c.verify_witnesses = true;
        let reduced = run_concentration(&c).unwrap();
        c.distance_method = DistanceMethod::Direct;
        let direct = run_concentration(&c).unwrap();
        assert!((reduced.rows[0].median_dist - direct.rows[0].median_dist).abs() < 0.05);
    }

    #[test]
    fn block_decay_degenerate_and_trend() {
        let report = run_block_decay(2, &[0, 40], 60, 3).unwrap();
        assert!((report.row(0).unwrap().median_norm - 1.0).abs() < 1e-12);
        assert!(report.row(40).unwrap().median_norm < 0.6);
        assert!(run_block_decay(2, &[10], 29, 3).is_err());
    }
}
