use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::norm_inf;
use crate::rom_nonlinear::LatentMap;

/// `(φ_k − φ̂_k) / ‖φ‖∞` at the cell `k` of largest absolute deviation
/// (the first such cell on ties).
pub fn signed_max_error(reference: &[f64], approx: &[f64]) -> Result<f64> {
    check_dim("signed_max_error", reference.len(), approx.len())?;
    let scale = norm_inf(reference);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain("reference flux is zero or not finite".into()));
    }
    let mut worst = 0.0;
    let mut worst_abs = -1.0;
    for (r, a) in reference.iter().zip(approx) {
        let d = r - a;
        if d.abs() > worst_abs {
            worst_abs = d.abs();
            worst = d;
        }
    }
    Ok(worst / scale)
}

/// Representation error of `flux` under `decode ∘ encode`.
pub fn e_max_reconstruction<M: LatentMap + ?Sized>(flux: &[f64], map: &M) -> Result<f64> {
    signed_max_error(flux, &map.reconstruct(flux)?)
}

pub fn e_max_flux(flux_hfm: &[f64], flux_rom: &[f64]) -> Result<f64> {
    signed_max_error(flux_hfm, flux_rom)
}

pub fn e_keff(k_hfm: f64, k_rom: f64) -> f64 {
    k_hfm - k_rom
}

/// Empirical quantiles (linear interpolation between order statistics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub p02_5: f64,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub p97_5: f64,
    pub max: f64,
}

pub fn quantiles(values: &[f64]) -> Option<Quantiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    };
    Some(Quantiles {
        min: v[0],
        p02_5: q(0.025),
        p10: q(0.10),
        p50: q(0.5),
        p90: q(0.9),
        p97_5: q(0.975),
        max: v[v.len() - 1],
    })
}

/// Averages of one family of signed per-sample errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub n: usize,
    /// Mean of absolute values; the headline average.
    pub mean_abs: f64,
    pub mean_signed: f64,
    pub max_abs: f64,
    /// Quantiles of the signed values, for trimming histograms when plotting.
    pub quantiles: Option<Quantiles>,
}

pub fn averaged_errors(values: &[f64]) -> MetricSummary {
    let n = values.len();
    if n == 0 {
        return MetricSummary {
            n,
            mean_abs: f64::NAN,
            mean_signed: f64::NAN,
            max_abs: f64::NAN,
            quantiles: None,
        };
    }
    MetricSummary {
        n,
        mean_abs: values.iter().map(|v| v.abs()).sum::<f64>() / n as f64,
        mean_signed: values.iter().sum::<f64>() / n as f64,
        max_abs: values.iter().fold(0.0, |m, v| m.max(v.abs())),
        quantiles: quantiles(values),
    }
}
