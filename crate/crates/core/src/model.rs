//! Domain types shared by every stage of the composition pipeline.
//!
//! Units: time in integer minutes, current in mA, energy in mAh.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEC_REL_TOL: f64 = 1e-9;

/// Energy deliverable over `minutes` at `intensity` mA with transmission success rate `tsr`.
pub fn deliverable_energy(minutes: f64, intensity: f64, tsr: f64) -> f64 {
    minutes / 60.0 * intensity * tsr
}

fn check_fraction(field: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::field(field, format!("{value} is outside [0, 1]")));
    }
    Ok(())
}

/// Flat record form of a service, as it appears in CSV and JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceRecord {
    pub id: String,
    pub owner_id: String,
    pub area_id: String,
    pub start_time: i64,
    pub end_time: i64,
    #[serde(rename = "intensity_I")]
    pub intensity: f64,
    pub tsr: f64,
    /// Ignored on input; always recomputed.
    #[serde(default)]
    pub dec_advertised: Option<f64>,
    pub reliability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionalities: Option<String>,
}

/// An advertised crowdsourced energy service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ServiceRecord", into = "ServiceRecord")]
pub struct EnergyService {
    id: String,
    owner_id: String,
    area_id: String,
    start_time: i64,
    end_time: i64,
    intensity: f64,
    tsr: f64,
    dec_advertised: f64,
    reliability: f64,
    functionalities: Option<String>,
}

impl EnergyService {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        owner_id: impl Into<String>,
        area_id: impl Into<String>,
        start_time: i64,
        end_time: i64,
        intensity: f64,
        tsr: f64,
        reliability: f64,
    ) -> Result<Self> {
        validate_service(ServiceRecord {
            id: id.into(),
            owner_id: owner_id.into(),
            area_id: area_id.into(),
            start_time,
            end_time,
            intensity,
            tsr,
            dec_advertised: None,
            reliability,
            functionalities: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn owner_id(&self) -> &str {
        &self.owner_id
    }
    pub fn area_id(&self) -> &str {
        &self.area_id
    }
    pub fn start_time(&self) -> i64 {
        self.start_time
    }
    pub fn end_time(&self) -> i64 {
        self.end_time
    }
    pub fn duration(&self) -> i64 {
        self.end_time - self.start_time
    }
    pub fn intensity(&self) -> f64 {
        self.intensity
    }
    pub fn tsr(&self) -> f64 {
        self.tsr
    }
    pub fn dec_advertised(&self) -> f64 {
        self.dec_advertised
    }
    pub fn reliability(&self) -> f64 {
        self.reliability
    }
    pub fn functionalities(&self) -> Option<&str> {
        self.functionalities.as_deref()
    }

    /// Deliverable rate in mAh per minute.
    pub fn rate_per_minute(&self) -> f64 {
        self.intensity * self.tsr / 60.0
    }

    /// True when the service is live for a positive length of time inside `[start, end]`.
    pub fn overlaps(&self, start: i64, end: i64) -> bool {
        self.start_time < end && self.end_time > start
    }

    /// Same service with a different reliability score.
    pub fn with_reliability(&self, reliability: f64) -> Result<Self> {
        check_fraction("reliability", reliability)?;
        Ok(Self {
            reliability,
            ..self.clone()
        })
    }
}

/// Validates a raw record and derives `dec_advertised` from duration, intensity and tsr.
pub fn validate_service(raw: ServiceRecord) -> Result<EnergyService> {
    if raw.id.is_empty() {
        return Err(Error::field("id", "must not be empty"));
    }
    if raw.end_time <= raw.start_time {
        return Err(Error::EmptyInterval {
            start: raw.start_time,
            end: raw.end_time,
        });
    }
    if !raw.intensity.is_finite() || raw.intensity < 0.0 {
        return Err(Error::field(
            "intensity_I",
            format!("{} must be a non-negative number", raw.intensity),
        ));
    }
    check_fraction("tsr", raw.tsr)?;
    check_fraction("reliability", raw.reliability)?;
    let dec = deliverable_energy(
        (raw.end_time - raw.start_time) as f64,
        raw.intensity,
        raw.tsr,
    );
    Ok(EnergyService {
        id: raw.id,
        owner_id: raw.owner_id,
        area_id: raw.area_id,
        start_time: raw.start_time,
        end_time: raw.end_time,
        intensity: raw.intensity,
        tsr: raw.tsr,
        dec_advertised: dec,
        reliability: raw.reliability,
        functionalities: raw.functionalities,
    })
}

impl TryFrom<ServiceRecord> for EnergyService {
    type Error = Error;

    fn try_from(raw: ServiceRecord) -> Result<Self> {
        validate_service(raw)
    }
}

impl From<EnergyService> for ServiceRecord {
    fn from(s: EnergyService) -> Self {
        ServiceRecord {
            id: s.id,
            owner_id: s.owner_id,
            area_id: s.area_id,
            start_time: s.start_time,
            end_time: s.end_time,
            intensity: s.intensity,
            tsr: s.tsr,
            dec_advertised: Some(s.dec_advertised),
            reliability: s.reliability,
            functionalities: s.functionalities,
        }
    }
}

/// Returns true when `advertised` agrees with the recomputed capacity of `s`.
pub fn dec_consistent(s: &EnergyService, advertised: f64) -> bool {
    let expected = s.dec_advertised;
    (advertised - expected).abs() <= DEC_REL_TOL * expected.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    pub t_s: i64,
    pub area_id: String,
    #[serde(rename = "required_energy_RE")]
    pub required_energy: f64,
    #[serde(rename = "max_intensity_CI")]
    pub max_intensity: f64,
    #[serde(rename = "duration_du")]
    pub duration: i64,
    #[serde(rename = "hard_deadline_Dlh")]
    pub hard_deadline: i64,
}

/// A consumer's charging request. Deadlines are relative to `t_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QueryRecord", into = "QueryRecord")]
pub struct EnergyQuery {
    query_id: String,
    t_s: i64,
    area_id: String,
    required_energy: f64,
    max_intensity: f64,
    duration: i64,
    hard_deadline: i64,
}

impl EnergyQuery {
    pub fn new(
        query_id: impl Into<String>,
        t_s: i64,
        area_id: impl Into<String>,
        required_energy: f64,
        max_intensity: f64,
        duration: i64,
        hard_deadline: i64,
    ) -> Result<Self> {
        validate_query(QueryRecord {
            query_id: query_id.into(),
            t_s,
            area_id: area_id.into(),
            required_energy,
            max_intensity,
            duration,
            hard_deadline,
        })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }
    pub fn t_s(&self) -> i64 {
        self.t_s
    }
    pub fn area_id(&self) -> &str {
        &self.area_id
    }
    pub fn required_energy(&self) -> f64 {
        self.required_energy
    }
    pub fn max_intensity(&self) -> f64 {
        self.max_intensity
    }
    pub fn duration(&self) -> i64 {
        self.duration
    }
    /// Hard deadline as a duration after `t_s`.
    pub fn hard_deadline(&self) -> i64 {
        self.hard_deadline
    }
    /// Absolute soft deadline, `t_s + du`.
    pub fn soft_deadline_at(&self) -> i64 {
        self.t_s + self.duration
    }
    /// Absolute hard deadline, `t_s + Dlh`.
    pub fn hard_deadline_at(&self) -> i64 {
        self.t_s + self.hard_deadline
    }
    /// Tolerated extension past the soft deadline, `Dlh - du`.
    pub fn extension_budget(&self) -> i64 {
        self.hard_deadline - self.duration
    }
    /// Longest extension considered at all, `2 du`.
    pub fn max_extension(&self) -> i64 {
        2 * self.duration
    }
}

pub fn validate_query(raw: QueryRecord) -> Result<EnergyQuery> {
    if raw.query_id.is_empty() {
        return Err(Error::field("query_id", "must not be empty"));
    }
    if raw.duration <= 0 {
        return Err(Error::field(
            "duration_du",
            format!("{} must be positive", raw.duration),
        ));
    }
    if !(raw.required_energy.is_finite() && raw.required_energy > 0.0) {
        return Err(Error::field(
            "required_energy_RE",
            format!("{} must be positive", raw.required_energy),
        ));
    }
    if !(raw.max_intensity >= 0.0) {
        return Err(Error::field(
            "max_intensity_CI",
            format!("{} must be non-negative", raw.max_intensity),
        ));
    }
    if raw.hard_deadline < raw.duration {
        return Err(Error::field(
            "hard_deadline_Dlh",
            format!(
                "{} precedes the soft deadline du = {}",
                raw.hard_deadline, raw.duration
            ),
        ));
    }
    Ok(EnergyQuery {
        query_id: raw.query_id,
        t_s: raw.t_s,
        area_id: raw.area_id,
        required_energy: raw.required_energy,
        max_intensity: raw.max_intensity,
        duration: raw.duration,
        hard_deadline: raw.hard_deadline,
    })
}

impl TryFrom<QueryRecord> for EnergyQuery {
    type Error = Error;

    fn try_from(raw: QueryRecord) -> Result<Self> {
        validate_query(raw)
    }
}

impl From<EnergyQuery> for QueryRecord {
    fn from(q: EnergyQuery) -> Self {
        QueryRecord {
            query_id: q.query_id,
            t_s: q.t_s,
            area_id: q.area_id,
            required_energy: q.required_energy,
            max_intensity: q.max_intensity,
            duration: q.duration,
            hard_deadline: q.hard_deadline,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub index: usize,
    pub start: i64,
    pub end: i64,
}

impl Chunk {
    pub fn len(&self) -> i64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// A service restricted to one chunk, or the idle placeholder of a chunk
/// no service covers (`parent_id == None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialService {
    pub parent_id: Option<String>,
    pub chunk_index: usize,
    pub start: i64,
    pub end: i64,
    #[serde(rename = "intensity_I")]
    pub intensity: f64,
    pub tsr: f64,
    pub reliability: f64,
    pub dec: f64,
}

impl PartialService {
    /// Restriction of `service` to `[start, end]` within chunk `chunk_index`.
    pub fn of(service: &EnergyService, chunk_index: usize, start: i64, end: i64) -> Self {
        debug_assert!(start < end);
        debug_assert!(service.start_time() <= start && end <= service.end_time());
        PartialService {
            parent_id: Some(service.id().to_owned()),
            chunk_index,
            start,
            end,
            intensity: service.intensity(),
            tsr: service.tsr(),
            reliability: service.reliability(),
            dec: deliverable_energy((end - start) as f64, service.intensity(), service.tsr()),
        }
    }

    pub fn idle(chunk: &Chunk) -> Self {
        PartialService {
            parent_id: None,
            chunk_index: chunk.index,
            start: chunk.start,
            end: chunk.end,
            intensity: 0.0,
            tsr: 0.0,
            reliability: 1.0,
            dec: 0.0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.parent_id.is_none()
    }

    pub fn duration(&self) -> i64 {
        self.end - self.start
    }

    pub fn parent_label(&self) -> &str {
        self.parent_id.as_deref().unwrap_or("")
    }
}

/// One partial per chunk with its assessment scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeService {
    pub partials: Vec<PartialService>,
    pub tec: f64,
    pub agr: f64,
    pub rem_re: f64,
    pub ext_q: f64,
    pub utility: f64,
}

impl CompositeService {
    pub fn parent_ids(&self) -> Vec<&str> {
        self.partials
            .iter()
            .map(PartialService::parent_label)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityProfile {
    pub owner_id: String,
    pub eub: f64,
    pub successful_services: u64,
    pub total_services: u64,
}

impl ReliabilityProfile {
    pub fn new(owner_id: impl Into<String>, eub: f64, ss: u64, tps: u64) -> Result<Self> {
        check_fraction("eub", eub)?;
        if ss > tps {
            return Err(Error::InvariantViolation(format!(
                "successful services {ss} exceed total services {tps}"
            )));
        }
        Ok(Self {
            owner_id: owner_id.into(),
            eub,
            successful_services: ss,
            total_services: tps,
        })
    }
}

/// Consumer preference weights; `w_e + w_r == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceStrategy {
    w_e: f64,
    w_r: f64,
}

impl PreferenceStrategy {
    pub fn from_reliability_weight(w_r: f64) -> Result<Self> {
        check_fraction("w_r", w_r)?;
        Ok(Self {
            w_e: 1.0 - w_r,
            w_r,
        })
    }

    /// Maps the 1..=9 preference scale onto `w_r` in 0.1..=0.9.
    pub fn from_scale(level: u8) -> Result<Self> {
        if !(1..=9).contains(&level) {
            return Err(Error::field(
                "w_r",
                format!("scale level {level} outside 1..=9"),
            ));
        }
        Self::from_reliability_weight(f64::from(level) / 10.0)
    }

    pub fn neutral() -> Self {
        Self { w_e: 0.5, w_r: 0.5 }
    }

    pub fn w_e(&self) -> f64 {
        self.w_e
    }
    pub fn w_r(&self) -> f64 {
        self.w_r
    }
}

impl Default for PreferenceStrategy {
    fn default() -> Self {
        Self::neutral()
    }
}
