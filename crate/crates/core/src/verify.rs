//! The verification suite: every identity checked on seeded samples, with a
//! deterministic JSON report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Tolerances};
use crate::error::Result;
use crate::indicatrix::{verify_laplace1, verify_schrodinger_family, FiberResidual};
use crate::metric::{max_abs_matrix, MetricSpec, PointOnTM};
use crate::sampling::FiberSample;
use crate::spray::{CurvatureBundle, CurvatureEngine, EngineOptions};
use crate::volume::{fit_weak_isotropic, VolumeForm};

pub const MEAN_BERWALD_DUAL: &str = "mean-berwald-dual";
pub const VERTICAL_DISTORTION: &str = "vertical-distortion";
pub const E_ISOTROPY: &str = "e-isotropy";
pub const CHERN_BERWALD: &str = "chern-berwald";
pub const HOMOGENEITY: &str = "homogeneity";
pub const FIBER_LAPLACE: &str = "fiber-laplace";
pub const FIBER_SCHRODINGER: &str = "fiber-schrodinger";

/// Residuals below this are at round-off level, where halving the grid
/// cannot improve them further.
pub const CONVERGENCE_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The identity's hypothesis does not hold on any sample.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub id: String,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub worst_point: Option<PointOnTM<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityResult {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub metric: String,
    pub dimension: usize,
    pub volume: String,
    pub seed: u64,
    pub base_points: usize,
    pub fiber_points: usize,
    pub fiber_nodes: usize,
    pub options: EngineOptions,
    pub identities: Vec<IdentityResult>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn identity(&self, id: &str) -> Option<&IdentityResult> {
        self.identities.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Nodal residuals of the fiber identities, for CSV export.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalResidual {
    pub id: &'static str,
    pub index: usize,
    pub residual: FiberResidual<f64>,
}

#[derive(Clone, Debug)]
pub struct VerificationRun {
    pub report: VerificationReport,
    pub nodal: Vec<NodalResidual>,
}

#[derive(Default)]
struct Acc {
    max: f64,
    sum: f64,
    count: usize,
    worst: Option<PointOnTM<f64>>,
}

impl Acc {
    fn push(&mut self, r: f64, p: &PointOnTM<f64>) {
        // NaN counts as the worst possible residual
        if r.is_nan() || r > self.max || self.worst.is_none() {
            self.max = if r.is_nan() { f64::INFINITY } else { r.max(self.max) };
            self.worst = Some(p.clone());
        }
        self.sum += if r.is_nan() { f64::INFINITY } else { r };
        self.count += 1;
    }

    fn finish(self, id: &str, tol: f64) -> IdentityResult {
        let verdict = if self.count == 0 {
            Verdict::NotApplicable
        } else if self.max < tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        IdentityResult {
            id: id.into(),
            verdict,
            max_residual: self.max,
            mean_residual: if self.count > 0 { self.sum / self.count as f64 } else { 0.0 },
            tolerance: tol,
            samples: self.count,
            worst_point: self.worst,
            convergence_ratio: None,
            note: None,
        }
    }
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |w, (x, y)| w.max((x - y).abs()))
}

/// `max|a - b| / max(max|a|, max|b|, 1)`.
pub fn relative_difference(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let scale = max_abs_matrix(a).max(max_abs_matrix(b)).max(1.0);
    max_diff(a, b) / scale
}

fn flat(b: &CurvatureBundle<f64>) -> Vec<(i32, Vec<f64>)> {
    let g = &b.geometry;
    let s = &b.s_curvature;
    let t3 = |t: &Vec<Vec<Vec<f64>>>| t.iter().flatten().flatten().copied().collect::<Vec<_>>();
    vec![
        (2, g.spray.clone()),
        (1, g.nonlinear.iter().flatten().copied().collect()),
        (0, t3(&g.berwald_connection)),
        (-1, g.berwald.iter().flat_map(t3).collect()),
        (0, t3(&g.cartan)),
        (-1, g.mean_cartan.clone()),
        (0, g.g.iter().flatten().copied().collect()),
        (0, g.angular.iter().flatten().copied().collect()),
        (0, t3(&g.landsberg)),
        (0, g.mean_landsberg.clone()),
        (0, g.mean_berwald.iter().flatten().copied().collect()),
        (0, vec![g.berwald_scalar, s.tau]),
        (1, vec![s.s]),
        (0, s.grad_s_y.clone()),
        (-1, s.hess_s_y.iter().flatten().copied().collect()),
    ]
}

/// Worst relative homogeneity defect of all bundle quantities under `y -> lambda y`.
fn homogeneity_defect(base: &CurvatureBundle<f64>, scaled: &CurvatureBundle<f64>, lambda: f64) -> f64 {
    let mut worst = 0.0f64;
    for ((d, a), (_, b)) in flat(base).into_iter().zip(flat(scaled)) {
        let f = lambda.powi(d);
        let scale = 1.0 + a.iter().fold(0.0f64, |m, v| m.max((f * v).abs()));
        for (u, v) in a.iter().zip(&b) {
            worst = worst.max((v - f * u).abs() / scale);
        }
    }
    worst
}

struct Ctx<'a> {
    engine: &'a CurvatureEngine<f64>,
    tol: &'a Tolerances,
}

impl Ctx<'_> {
    fn algebraic(&self, fibers: &[FiberSample<f64>]) -> Result<Vec<IdentityResult>> {
        let n = self.engine.dim();
        let mut dual = Acc::default();
        let mut dv = Acc::default();
        let mut iso = Acc::default();
        let mut rel = Acc::default();
        let mut hom = Acc::default();
        let mut skipped_iso = 0usize;
        for fs in fibers {
            let ls = self.engine.log_sigma(&fs.x)?;
            let bundles: Vec<CurvatureBundle<f64>> = fs
                .points
                .iter()
                .map(|p| self.engine.bundle_with(p, &ls))
                .collect::<Result<_>>()?;
            for b in &bundles {
                let p = &b.geometry.point;
                dual.push(relative_difference(&b.geometry.mean_berwald, &b.mean_berwald_from_s), p);
                let d = b
                    .dtau_dy
                    .iter()
                    .zip(&b.geometry.mean_cartan)
                    .fold(0.0f64, |w, (a, c)| w.max((a - c).abs()));
                dv.push(d, p);
                rel.push(b.geometry.relation_residual(), p);
                for lambda in [0.5, 2.0] {
                    let sb = self.engine.bundle_with(&p.scaled(lambda), &ls)?;
                    hom.push(homogeneity_defect(b, &sb, lambda), p);
                }
            }
            // the isotropy conclusion applies where S = c F + xi.y on the fiber
            let samples: Vec<_> = bundles.iter().map(|b| b.s_curvature.clone()).collect();
            let fit = match fit_weak_isotropic(&self.engine.metric, &samples) {
                Ok(f) => f,
                Err(_) => {
                    skipped_iso += 1;
                    continue;
                }
            };
            let s_scale = 1.0
                + bundles
                    .iter()
                    .fold(0.0f64, |m, b| m.max(b.s_curvature.s.abs() / b.geometry.f));
            if fit.residual > self.tol.quadrature * s_scale {
                skipped_iso += 1;
                continue;
            }
            for b in &bundles {
                let g = &b.geometry;
                let r = g
                    .isotropy_residual()
                    .max((fit.c - g.berwald_scalar / (n as f64 - 1.0)).abs());
                iso.push(r, &g.point);
            }
        }
        let mut iso = iso.finish(E_ISOTROPY, self.tol.e_isotropy);
        if skipped_iso > 0 {
            iso.note = Some(format!(
                "{skipped_iso} of {} fibers skipped: S not of the form c F + xi.y",
                fibers.len()
            ));
        }
        Ok(vec![
            dual.finish(MEAN_BERWALD_DUAL, self.tol.mean_berwald_dual),
            dv.finish(VERTICAL_DISTORTION, self.tol.vertical_distortion),
            iso,
            rel.finish(CHERN_BERWALD, self.tol.chern_berwald),
            hom.finish(HOMOGENEITY, self.tol.homogeneity),
        ])
    }

    fn fiber(
        &self,
        fibers: &[FiberSample<f64>],
        nodes: usize,
        xi_count: usize,
        seed: u64,
        nodal: &mut Vec<NodalResidual>,
    ) -> Result<Vec<IdentityResult>> {
        let m = &self.engine.metric;
        if m.dim() != 2 {
            let na = |id: &str, tol: f64| {
                let mut r = Acc::default().finish(id, tol);
                r.note = Some("fiber identities are checked for n = 2 only".into());
                r
            };
            return Ok(vec![
                na(FIBER_LAPLACE, self.tol.fiber_laplace),
                na(FIBER_SCHRODINGER, self.tol.fiber_schrodinger),
            ]);
        }
        let mut lap = Acc::default();
        let mut coarse_max = 0.0f64;
        let mut sch = Acc::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1be);
        for (i, fs) in fibers.iter().enumerate() {
            let p = PointOnTM::new(fs.x.clone(), vec![1.0, 0.0])?;
            let fine = verify_laplace1(self.engine, &fs.x, nodes)?;
            let coarse = verify_laplace1(self.engine, &fs.x, nodes / 2)?;
            lap.push(fine.max_residual, &p);
            coarse_max = coarse_max.max(coarse.max_residual);
            nodal.push(NodalResidual {
                id: FIBER_LAPLACE,
                index: i,
                residual: fine,
            });
            let xis: Vec<Vec<f64>> = (0..xi_count)
                .map(|_| vec![rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
                .collect();
            for r in verify_schrodinger_family(m, &fs.x, &xis, nodes)? {
                sch.push(r.max_residual, &p);
                nodal.push(NodalResidual {
                    id: FIBER_SCHRODINGER,
                    index: i,
                    residual: r,
                });
            }
        }
        let fine_max = lap.max;
        let mut lap = lap.finish(FIBER_LAPLACE, self.tol.fiber_laplace);
        let ratio = if fine_max > 0.0 { coarse_max / fine_max } else { f64::INFINITY };
        lap.convergence_ratio = Some(if ratio.is_finite() { ratio } else { f64::MAX });
        let converged = ratio > 10.0 || (fine_max < CONVERGENCE_FLOOR && coarse_max < CONVERGENCE_FLOOR);
        lap.note = Some(format!(
            "N={} vs N={}: max residual {coarse_max:.3e} -> {fine_max:.3e}{}",
            nodes / 2,
            nodes,
            if converged {
                if ratio > 10.0 { "" } else { " (round-off floor)" }
            } else {
                " (not converging)"
            }
        ));
        if !converged {
            lap.verdict = Verdict::Fail;
        }
        Ok(vec![lap, sch.finish(FIBER_SCHRODINGER, self.tol.fiber_schrodinger)])
    }
}

/// Runs every identity on the sample plan of `cfg`.
pub fn run_verification(cfg: &RunConfig, options: &EngineOptions) -> Result<VerificationRun> {
    let metric: MetricSpec<f64> = cfg.metric.build()?;
    let volume: VolumeForm<f64> = cfg.volume_form()?;
    let engine = CurvatureEngine::new(metric, volume).with_options(*options);
    verify_engine(&engine, cfg)
}

pub fn verify_engine(engine: &CurvatureEngine<f64>, cfg: &RunConfig) -> Result<VerificationRun> {
    let fibers = cfg.samples.draw(&engine.metric, &|_| true)?;
    let ctx = Ctx {
        engine,
        tol: &cfg.tolerances,
    };
    let mut identities = ctx.algebraic(&fibers)?;
    let mut nodal = Vec::new();
    identities.extend(ctx.fiber(&fibers, cfg.fiber_nodes, cfg.xi_count, cfg.samples.seed, &mut nodal)?);
    let passed = identities.iter().all(IdentityResult::passed);
    Ok(VerificationRun {
        report: VerificationReport {
            metric: engine.metric.label(),
            dimension: engine.dim(),
            volume: engine.volume.label(),
            seed: cfg.samples.seed,
            base_points: fibers.len(),
            fiber_points: fibers.iter().map(|f| f.points.len()).sum(),
            fiber_nodes: cfg.fiber_nodes,
            options: engine.options,
            identities,
            passed,
        },
        nodal,
    })
}
