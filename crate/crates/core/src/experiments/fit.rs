use serde::{Deserialize, Serialize};

use super::SweepRecord;
use crate::{Error, Result};

/// Candidate decay laws for `gap(k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `a log k / k`
    LogKOverK,
    /// `a / k`
    InvK,
    /// `a / sqrt k`
    InvSqrtK,
    /// `a log k / k + b / k`
    LogKOverKPlusInvK,
}

impl RateModel {
    pub const ALL: [RateModel; 4] = [Self::LogKOverK, Self::InvK, Self::InvSqrtK, Self::LogKOverKPlusInvK];

    pub fn name(self) -> &'static str {
        match self {
            Self::LogKOverK => "a*log(k)/k",
            Self::InvK => "a/k",
            Self::InvSqrtK => "a/sqrt(k)",
            Self::LogKOverKPlusInvK => "a*log(k)/k + b/k",
        }
    }

    fn basis(self, k: f64) -> Vec<f64> {
        match self {
            Self::LogKOverK => vec![k.ln() / k],
            Self::InvK => vec![1.0 / k],
            Self::InvSqrtK => vec![1.0 / k.sqrt()],
            Self::LogKOverKPlusInvK => vec![k.ln() / k, 1.0 / k],
        }
    }

    pub fn eval(self, params: &[f64], k: f64) -> f64 {
        self.basis(k).iter().zip(params).map(|(b, p)| b * p).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: RateModel,
    pub params: Vec<f64>,
    /// Root mean square of `(model - gap) / gap`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub ks: Vec<usize>,
    pub gaps: Vec<f64>,
    pub fits: Vec<ModelFit>,
    pub best: RateModel,
    /// `gap k / log k` per point; its limit is an open question.
    pub gap_k_over_log_k: Vec<f64>,
    /// `max_k (1 - beta_total) k²` over the records that report it.
    pub beta_deficit_c: Option<f64>,
}

impl FitReport {
    pub fn fit(&self, model: RateModel) -> &ModelFit {
        self.fits.iter().find(|f| f.model == model).expect("every model is fitted")
    }
}

/// Relative least squares below which two fits count as equally good.
const TIE: f64 = 1e-12;

/// Fit every rate model to the successful records with positive gaps.
pub fn fit_rate(records: &[SweepRecord]) -> Result<FitReport> {
    let pts: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.ok())
        .filter_map(|r| r.gap.filter(|g| *g > 0.0 && g.is_finite()).map(|g| (r.k, g)))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Usage(format!("rate fit needs at least 4 records with positive gaps, got {}", pts.len())));
    }
    let fits: Vec<ModelFit> = RateModel::ALL.iter().map(|&m| fit_model(m, &pts)).collect::<Result<_>>()?;
    let mut best = &fits[0];
    for f in &fits[1..] {
        let fewer = f.params.len() < best.params.len();
        if f.residual < best.residual - TIE || (fewer && f.residual <= best.residual + TIE) {
            best = f;
        }
    }
    let deficits: Vec<f64> = records
        .iter()
        .filter(|r| r.ok())
        .filter_map(|r| r.beta_total.map(|b| (1.0 - b) * (r.k as f64).powi(2)))
        .collect();
    Ok(FitReport {
        ks: pts.iter().map(|p| p.0).collect(),
        gaps: pts.iter().map(|p| p.1).collect(),
        best: best.model,
        fits: fits.clone(),
        gap_k_over_log_k: pts.iter().map(|&(k, g)| g * k as f64 / (k as f64).ln()).collect(),
        beta_deficit_c: deficits.into_iter().reduce(f64::max),
    })
}

/// Minimize `Σ ((model(k) - g) / g)²`, linear in the parameters.
fn fit_model(model: RateModel, pts: &[(usize, f64)]) -> Result<ModelFit> {
    let p = model.basis(2.0).len();
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|&(k, g)| model.basis(k as f64).into_iter().map(|b| b / g).collect())
        .collect();
    let mut ata = vec![vec![0.0; p]; p];
    let mut atb = vec![0.0; p];
    for row in &rows {
        for i in 0..p {
            atb[i] += row[i];
            for j in 0..p {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let params = match p {
        1 => vec![atb[0] / ata[0][0]],
        2 => {
            let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
            if !(det.abs() > 1e-300) {
                return Err(Error::Numeric { message: "rate fit normal equations are singular".into(), residual: det });
            }
            vec![
                (atb[0] * ata[1][1] - atb[1] * ata[0][1]) / det,
                (atb[1] * ata[0][0] - atb[0] * ata[1][0]) / det,
            ]
        }
        _ => unreachable!("models have one or two parameters"),
    };
    let ss: f64 = rows
        .iter()
        .map(|row| {
            let fit: f64 = row.iter().zip(&params).map(|(r, a)| r * a).sum();
            (fit - 1.0).powi(2)
        })
        .sum();
    Ok(ModelFit { model, params, residual: (ss / pts.len() as f64).sqrt() })
}
