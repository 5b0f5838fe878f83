//! Provider reliability: usage regularity (EUB) times provision success (PB).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{EnergyService, ReliabilityProfile};

pub const DEFAULT_BINS: usize = 10;

const RANGE_EPS: f64 = 1e-9;

/// State-of-charge samples of one provider device.
#[derive(Debug, Clone, PartialEq)]
pub struct SocSeries {
    owner_id: String,
    samples: Vec<(i64, f64)>,
}

impl SocSeries {
    pub fn new(owner_id: impl Into<String>, samples: Vec<(i64, f64)>) -> Result<Self> {
        for pair in samples.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::field(
                    "time_min",
                    format!(
                        "times must be strictly increasing ({} then {})",
                        pair[0].0, pair[1].0
                    ),
                ));
            }
        }
        if let Some(&(_, soc)) = samples.iter().find(|(_, s)| !(0.0..=1.0).contains(s)) {
            return Err(Error::field("soc", format!("{soc} is outside [0, 1]")));
        }
        Ok(Self {
            owner_id: owner_id.into(),
            samples,
        })
    }

    pub fn owner_id(&self) -> &str {
        &self.owner_id
    }

    pub fn samples(&self) -> &[(i64, f64)] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvisionHistory {
    pub owner_id: String,
    pub successful: u64,
    pub total: u64,
}

/// `SS / TPS`; providers without history get 1.0.
pub fn provision_success(ss: u64, tps: u64) -> Result<f64> {
    if ss > tps {
        return Err(Error::InvariantViolation(format!(
            "successful services {ss} exceed total services {tps}"
        )));
    }
    if tps == 0 {
        return Ok(1.0);
    }
    Ok(ss as f64 / tps as f64)
}

/// Normalized Shannon entropy of `values` histogrammed into `bins` equal-width
/// bins spanning the observed range. Returns a value in [0, 1].
pub fn normalized_entropy(values: &[f64], bins: usize) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // spreads at rounding-noise level count as a single value
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if values.is_empty() || hi - lo <= RANGE_EPS * scale {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    (h / (bins as f64).ln()).clamp(0.0, 1.0)
}

/// Usage regularity from a SoC trace: one minus the normalized entropy of the
/// per-minute discharge rates between consecutive samples.
pub fn eub_from_soc(series: &SocSeries, bins: usize) -> Result<f64> {
    if series.samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "SoC series of `{}` has {} sample(s), need at least 2",
            series.owner_id,
            series.samples.len()
        )));
    }
    if bins < 2 {
        return Err(Error::field("bins", format!("{bins} must be at least 2")));
    }
    let rates: Vec<f64> = series
        .samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0) as f64)
        .collect();
    Ok(1.0 - normalized_entropy(&rates, bins))
}

pub fn reliability_score(eub: f64, pb: f64) -> f64 {
    (eub * pb).clamp(0.0, 1.0)
}

impl ReliabilityProfile {
    pub fn reliability(&self) -> Result<f64> {
        Ok(reliability_score(
            self.eub,
            provision_success(self.successful_services, self.total_services)?,
        ))
    }
}

/// Builds per-owner profiles from SoC traces and provision histories. Owners
/// missing from `history` get no-history defaults; owners missing a SoC trace
/// are skipped.
pub fn build_profiles(
    soc: &[SocSeries],
    history: &[ProvisionHistory],
    bins: usize,
) -> Result<Vec<ReliabilityProfile>> {
    let by_owner: HashMap<&str, &ProvisionHistory> =
        history.iter().map(|h| (h.owner_id.as_str(), h)).collect();
    soc.iter()
        .map(|series| {
            let eub = eub_from_soc(series, bins)?;
            let (ss, tps) = by_owner
                .get(series.owner_id())
                .map_or((0, 0), |h| (h.successful, h.total));
            ReliabilityProfile::new(series.owner_id(), eub, ss, tps)
        })
        .collect()
}

/// Overrides each service's reliability with its owner's profile score.
/// Services whose owner has no profile keep their advertised value.
pub fn apply_profiles(
    services: &[EnergyService],
    profiles: &[ReliabilityProfile],
) -> Result<Vec<EnergyService>> {
    let scores: HashMap<&str, f64> = profiles
        .iter()
        .map(|p| Ok((p.owner_id.as_str(), p.reliability()?)))
        .collect::<Result<_>>()?;
    services
        .iter()
        .map(|s| match scores.get(s.owner_id()) {
            Some(&r) => s.with_reliability(r),
            None => Ok(s.clone()),
        })
        .collect()
}
