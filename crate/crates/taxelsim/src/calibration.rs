//! Current-to-torque alignment.
//!
//! Real hardware reports motor current, simulation reports joint torque;
//! both correlate linearly with fingertip contact force. Fitting F = a*I
//! on real data and F = b*tau on sim data, then normalizing each drive
//! signal by its observed maximum, yields a shared dimensionless force
//! proxy in [0, 1]. The normalized current can then populate the "joint
//! torque" observation slot at deployment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Real,
    Sim,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub joint_id: u32,
    pub drive_signal: f64,
    pub contact_force: f64,
    pub domain: Domain,
}

/// Fitted constants for one joint.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JointCalibration {
    /// Force per current unit, from real data.
    pub alpha: f64,
    /// Force per torque unit, from sim data.
    pub beta: f64,
    pub i_max: f64,
    pub tau_max: f64,
    pub f_max_real: f64,
    pub f_max_sim: f64,
    pub rms_real: f64,
    pub rms_sim: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct CalibrationMap {
    pub joints: BTreeMap<u32, JointCalibration>,
    /// Fallback used for any joint id absent from `joints` when the map is
    /// configured as shared.
    #[serde(default)]
    pub shared: Option<JointCalibration>,
}

impl CalibrationMap {
    pub fn joint(&self, joint_id: u32) -> Result<&JointCalibration> {
        self.joints
            .get(&joint_id)
            .or(self.shared.as_ref())
            .ok_or_else(|| {
                SimError::config("calibration", format!("no entry for joint {joint_id}"))
            })
    }

    /// Maps a real current reading into the [0, 1] force-proxy scale.
    pub fn normalize_current(&self, i_real: f64, joint_id: u32) -> Result<f64> {
        let j = self.joint(joint_id)?;
        Ok((i_real / j.i_max).clamp(0.0, 1.0))
    }

    /// Maps a simulated torque into the [0, 1] force-proxy scale. This
    /// value populates the joint-torque observation slot.
    pub fn normalize_torque(&self, tau_sim: f64, joint_id: u32) -> Result<f64> {
        let j = self.joint(joint_id)?;
        Ok((tau_sim / j.tau_max).clamp(0.0, 1.0))
    }

    pub fn load(path: &std::path::Path) -> Result<CalibrationMap> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Uniform map with a given torque ceiling, for runs without a fitted
    /// calibration file.
    pub fn uniform(tau_max: f64) -> CalibrationMap {
        CalibrationMap {
            joints: BTreeMap::new(),
            shared: Some(JointCalibration {
                alpha: 1.0,
                beta: 1.0,
                i_max: 1.0,
                tau_max,
                f_max_real: 1.0,
                f_max_sim: tau_max,
                rms_real: 0.0,
                rms_sim: 0.0,
            }),
        }
    }
}

/// Through-origin least squares: slope minimizing sum (F - slope*s)^2.
/// Returns (slope, rms residual).
pub fn fit_linear(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(SimError::DegenerateFit(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let first = samples[0].0;
    if samples.iter().all(|(s, _)| *s == first) {
        return Err(SimError::DegenerateFit(
            "all drive-signal values identical".into(),
        ));
    }
    let ss: f64 = samples.iter().map(|(s, _)| s * s).sum();
    let sf: f64 = samples.iter().map(|(s, f)| s * f).sum();
    if ss == 0.0 {
        return Err(SimError::DegenerateFit("all drive signals are zero".into()));
    }
    let slope = sf / ss;
    let rms = (samples
        .iter()
        .map(|(s, f)| (f - slope * s).powi(2))
        .sum::<f64>()
        / samples.len() as f64)
        .sqrt();
    Ok((slope, rms))
}

/// Least squares with an intercept, for data exploration only; the
/// deployed map always uses the through-origin fit.
pub fn fit_affine(samples: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = samples.len() as f64;
    if samples.len() < 2 {
        return Err(SimError::DegenerateFit("need at least 2 samples".into()));
    }
    let mean_s: f64 = samples.iter().map(|(s, _)| s).sum::<f64>() / n;
    let mean_f: f64 = samples.iter().map(|(_, f)| f).sum::<f64>() / n;
    let var: f64 = samples.iter().map(|(s, _)| (s - mean_s).powi(2)).sum();
    if var == 0.0 {
        return Err(SimError::DegenerateFit(
            "all drive-signal values identical".into(),
        ));
    }
    let cov: f64 = samples
        .iter()
        .map(|(s, f)| (s - mean_s) * (f - mean_f))
        .sum();
    let slope = cov / var;
    let intercept = mean_f - slope * mean_s;
    let rms = (samples
        .iter()
        .map(|(s, f)| (f - slope * s - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((slope, intercept, rms))
}

/// Fits a per-joint calibration map from mixed real/sim samples. Every
/// joint present must carry both domains.
pub fn fit_map(samples: &[CalibrationSample]) -> Result<CalibrationMap> {
    if samples.is_empty() {
        return Err(SimError::config("calibration", "no samples"));
    }
    // per joint: (current, force) pairs for the real domain, then the sim domain
    type DomainPairs = (Vec<(f64, f64)>, Vec<(f64, f64)>);
    let mut by_joint: BTreeMap<u32, DomainPairs> = BTreeMap::new();
    for s in samples {
        if s.drive_signal < 0.0 || s.contact_force < 0.0 {
            return Err(SimError::config(
                "calibration",
                format!(
                    "joint {}: negative sample ({}, {})",
                    s.joint_id, s.drive_signal, s.contact_force
                ),
            ));
        }
        let entry = by_joint.entry(s.joint_id).or_default();
        match s.domain {
            Domain::Real => entry.0.push((s.drive_signal, s.contact_force)),
            Domain::Sim => entry.1.push((s.drive_signal, s.contact_force)),
        }
    }
    let mut joints = BTreeMap::new();
    for (joint_id, (real, sim)) in by_joint {
        if real.is_empty() || sim.is_empty() {
            return Err(SimError::config(
                "calibration",
                format!("joint {joint_id} is missing real or sim samples"),
            ));
        }
        let (alpha, rms_real) = fit_linear(&real)?;
        let (beta, rms_sim) = fit_linear(&sim)?;
        let i_max = real.iter().map(|(s, _)| *s).fold(0.0, f64::max);
        let tau_max = sim.iter().map(|(s, _)| *s).fold(0.0, f64::max);
        let f_max_real = real.iter().map(|(_, f)| *f).fold(0.0, f64::max);
        let f_max_sim = sim.iter().map(|(_, f)| *f).fold(0.0, f64::max);
        if alpha <= 0.0 || beta <= 0.0 || i_max <= 0.0 || tau_max <= 0.0 {
            return Err(SimError::DegenerateFit(format!(
                "joint {joint_id}: non-positive fit (alpha {alpha}, beta {beta}, i_max {i_max}, tau_max {tau_max})"
            )));
        }
        joints.insert(
            joint_id,
            JointCalibration {
                alpha,
                beta,
                i_max,
                tau_max,
                f_max_real,
                f_max_sim,
                rms_real,
                rms_sim,
            },
        );
    }
    Ok(CalibrationMap {
        joints,
        shared: None,
    })
}

/// Reads samples from CSV with header `joint_id,drive_signal,contact_force,domain`.
pub fn read_samples_csv<R: std::io::Read>(reader: R) -> Result<Vec<CalibrationSample>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let r = record?;
        let joint_id: u32 = parse_field(&r, 0, "joint_id")?;
        let drive_signal: f64 = parse_field(&r, 1, "drive_signal")?;
        let contact_force: f64 = parse_field(&r, 2, "contact_force")?;
        let domain = match r.get(3).map(str::trim) {
            Some("real") => Domain::Real,
            Some("sim") => Domain::Sim,
            other => {
                return Err(SimError::config(
                    "calibration.csv.domain",
                    format!("expected real|sim, got {other:?}"),
                ))
            }
        };
        out.push(CalibrationSample {
            joint_id,
            drive_signal,
            contact_force,
            domain,
        });
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    record
        .get(idx)
        .ok_or_else(|| SimError::config(format!("calibration.csv.{name}"), "missing column"))?
        .trim()
        .parse()
        .map_err(|e| SimError::config(format!("calibration.csv.{name}"), format!("{e}")))
}
