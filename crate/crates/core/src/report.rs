//! Point input and machine-readable output (JSON and CSV).

use serde::{Deserialize, Serialize};

use crate::classify::ClassificationResult;
use crate::error::{FinslerError, Result};
use crate::metric::{max_abs_matrix, max_abs_t3, max_abs_t4, PointOnTM, ValidationReport};
use crate::spray::CurvatureBundle;
use crate::verify::{NodalResidual, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Reads points from CSV with header `x1..xn,y1..yn`. Line numbers in
/// errors are 1-based and count the header.
pub fn parse_points_csv(src: &str, n: usize) -> Result<Vec<PointOnTM<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(src.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| FinslerError::Parse { line: 1, message: e.to_string() })?
        .clone();
    let want: Vec<String> = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("y{i}")))
        .collect();
    let got: Vec<&str> = header.iter().collect();
    if got != want {
        return Err(FinslerError::Parse {
            line: 1,
            message: format!("expected header '{}', found '{}'", want.join(","), got.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FinslerError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| FinslerError::Parse {
                        line,
                        message: format!("'{f}' is not a finite number"),
                    })
            })
            .collect::<Result<_>>()?;
        let p = PointOnTM::new(vals[..n].to_vec(), vals[n..].to_vec())
            .map_err(|e| FinslerError::Parse { line, message: e.to_string() })?;
        out.push(p);
    }
    if out.is_empty() {
        return Err(FinslerError::Parse { line: 1, message: "no points".into() });
    }
    Ok(out)
}

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Full curvature data at every point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointsReport {
    pub metric: String,
    pub volume: String,
    pub points: Vec<CurvatureBundle<f64>>,
}

impl PointsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row of scalar summaries per point.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |b| b.geometry.dim());
        csv_string(|w| {
            let mut head: Vec<String> = (1..=n)
                .map(|i| format!("x{i}"))
                .chain((1..=n).map(|i| format!("y{i}")))
                .collect();
            head.extend(
                [
                    "F", "det_g", "tau", "S", "S_tilde", "e", "max_B", "max_L", "max_J", "max_E",
                    "isotropy_residual", "relation_residual",
                ]
                .map(String::from),
            );
            w.write_record(&head)?;
            for b in &self.points {
                let g = &b.geometry;
                let mut row: Vec<String> = g.point.x.iter().chain(&g.point.y).map(|&v| num(v)).collect();
                row.extend(
                    [
                        g.f,
                        g.detg,
                        b.s_curvature.tau,
                        b.s_curvature.s,
                        b.s_curvature.s_tilde,
                        g.berwald_scalar,
                        max_abs_t4(&g.berwald),
                        max_abs_t3(&g.landsberg),
                        g.mean_landsberg.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                        max_abs_matrix(&g.mean_berwald),
                        g.isotropy_residual(),
                        g.relation_residual(),
                    ]
                    .map(num),
                );
                w.write_record(&row)?;
            }
            Ok(())
        })
    }
}

pub fn verification_csv(r: &VerificationReport) -> String {
    csv_string(|w| {
        w.write_record(["id", "verdict", "max_residual", "mean_residual", "tolerance", "samples", "convergence_ratio"])?;
        for i in &r.identities {
            w.write_record([
                i.id.clone(),
                serde_json::to_value(i.verdict).expect("enum").as_str().unwrap_or_default().to_string(),
                num(i.max_residual),
                num(i.mean_residual),
                num(i.tolerance),
                i.samples.to_string(),
                i.convergence_ratio.map(num).unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
}

/// Per-node residuals of the fiber identities.
pub fn nodal_csv(nodal: &[NodalResidual]) -> String {
    csv_string(|w| {
        w.write_record(["id", "base_index", "x1", "x2", "node", "theta", "residual"])?;
        for r in nodal {
            for (k, (t, v)) in r.residual.theta.iter().zip(&r.residual.residuals).enumerate() {
                w.write_record([
                    r.id.to_string(),
                    r.index.to_string(),
                    num(r.residual.x[0]),
                    num(r.residual.x[1]),
                    k.to_string(),
                    num(*t),
                    num(*v),
                ])?;
            }
        }
        Ok(())
    })
}

pub fn classification_csv(c: &ClassificationResult) -> String {
    csv_string(|w| {
        w.write_record(["label", "present", "max_residual"])?;
        for (l, v) in &c.residuals {
            w.write_record([l.to_string(), c.has(*l).to_string(), num(*v)])?;
        }
        Ok(())
    })
}

pub fn validation_csv(v: &ValidationReport) -> String {
    csv_string(|w| {
        w.write_record(["sample", "kind", "detail"])?;
        for f in &v.failures {
            w.write_record([f.sample.to_string(), format!("{:?}", f.kind), f.detail.clone()])?;
        }
        Ok(())
    })
}
