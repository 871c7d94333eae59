//! Fiber and detector model: transmission, dark counts, misalignment, and the
//! resulting per-trial key rate as a function of distance.

use serde::{Deserialize, Serialize};

use crate::attack::AttackParams;
use crate::bounds::{key_rate, KeyRateReport};
use crate::error::{degenerate, invalid, Error, Result};
use crate::par;
use crate::protocol::BackwardChannelParams;

/// Physical link parameters. Defaults are off-the-shelf fiber and detector
/// values: 0.20 dB/km, 10% detection efficiency, 1e-5 dark counts per gate,
/// 1% misalignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub distance_km: f64,
    pub attenuation_db_per_km: f64,
    pub detector_efficiency: f64,
    pub dark_count_prob: f64,
    pub misalignment: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            distance_km: 0.0,
            attenuation_db_per_km: 0.20,
            detector_efficiency: 0.10,
            dark_count_prob: 1e-5,
            misalignment: 0.01,
        }
    }
}

impl ChannelParams {
    pub fn at_distance(self, distance_km: f64) -> Self {
        Self {
            distance_km,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.distance_km.is_finite() || self.distance_km < 0.0 {
            return Err(invalid(format!(
                "distance_km = {} must be non-negative",
                self.distance_km
            )));
        }
        if !self.attenuation_db_per_km.is_finite() || self.attenuation_db_per_km < 0.0 {
            return Err(invalid(format!(
                "attenuation_db_per_km = {} must be non-negative",
                self.attenuation_db_per_km
            )));
        }
        for (name, p) in [
            ("detector_efficiency", self.detector_efficiency),
            ("dark_count_prob", self.dark_count_prob),
            ("misalignment", self.misalignment),
        ] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        fiber_efficiency(self.distance_km, self.attenuation_db_per_km)
    }

    /// Loss+flip realization for the session simulator: forward channel with
    /// transmission η and flip probability `forward_error`, loss-only
    /// backward channel with transmission η.
    pub fn to_session_channels(&self) -> Result<(AttackParams, BackwardChannelParams)> {
        let eta = self.eta();
        let flip = forward_error(self)?;
        Ok((
            AttackParams::loss_flip(eta, flip)?,
            BackwardChannelParams::loss_flip(eta, 0.0)?,
        ))
    }
}

/// `η = 10^(−α L / 10)`.
pub fn fiber_efficiency(distance_km: f64, attenuation_db_per_km: f64) -> f64 {
    10f64.powf(-attenuation_db_per_km * distance_km / 10.0)
}

/// Conditional forward flip probability `p'01` (equal to `p'10`):
/// `(η η_d d_e + (1 − η η_d) p_d) / (η η_d + 2 (1 − η η_d) p_d)`.
pub fn forward_error(params: &ChannelParams) -> Result<f64> {
    params.validate()?;
    let detected = params.eta() * params.detector_efficiency;
    let pd = params.dark_count_prob;
    let num = detected * params.misalignment + (1.0 - detected) * pd;
    let den = detected + 2.0 * (1.0 - detected) * pd;
    if den <= 0.0 {
        return Err(degenerate(
            "no photon or dark count is ever detected on the forward channel",
        ));
    }
    Ok(num / den)
}

/// Message-mode error rate from dark counts:
/// `(1 − η²) η² η_d p_d / (η⁴ η_d² + 2 (1 − η²) η² η_d p_d)`.
pub fn message_qber(params: &ChannelParams) -> Result<f64> {
    params.validate()?;
    let eta2 = params.eta().powi(2);
    let ed = params.detector_efficiency;
    let pd = params.dark_count_prob;
    let num = (1.0 - eta2) * eta2 * ed * pd;
    let den = eta2 * eta2 * ed * ed + 2.0 * (1.0 - eta2) * eta2 * ed * pd;
    if den <= 0.0 {
        return Err(degenerate("message-mode detection probability is zero"));
    }
    Ok(num / den)
}

/// Per-trial rate `η⁴ (1 − (H(p'01) + H(p'10)) / (2η) − H(e))`, with the
/// backward efficiency set to the fiber transmission η.
pub fn overall_rate(params: &ChannelParams) -> Result<KeyRateReport> {
    let eta = params.eta();
    let p01 = forward_error(params)?;
    let qber = message_qber(params)?;
    Ok(key_rate(p01, p01, eta, qber)?.with_prefactor(eta.powi(4)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub distance_km: f64,
    pub eta: f64,
    pub report: KeyRateReport,
}

impl SweepPoint {
    /// `log₁₀(rate)`, absent for non-positive rates.
    pub fn lg_rate(&self) -> Option<f64> {
        (self.report.rate > 0.0).then(|| self.report.rate.log10())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub params: ChannelParams,
    pub points: Vec<SweepPoint>,
    /// Distance where `rate_raw` changes sign, located to `CUTOFF_RESOLUTION_KM`.
    pub cutoff_km: Option<f64>,
}

pub const CUTOFF_RESOLUTION_KM: f64 = 0.01;

/// Evaluates the rate at each distance and brackets the first sign change of
/// `rate_raw` between consecutive grid points, refining it by bisection.
pub fn sweep(template: &ChannelParams, distances: &[f64]) -> Result<Sweep> {
    sweep_with(par::Execution::default(), template, distances)
}

pub fn sweep_with(
    exec: par::Execution,
    template: &ChannelParams,
    distances: &[f64],
) -> Result<Sweep> {
    if distances.is_empty() {
        return Err(invalid("sweep needs at least one distance"));
    }
    template.validate()?;
    if let Some(d) = distances.iter().find(|d| !d.is_finite() || **d < 0.0) {
        return Err(invalid(format!("sweep distance {d} must be non-negative")));
    }
    let points = par::map_ordered(exec, distances, |&d| -> Result<SweepPoint> {
        let params = template.at_distance(d);
        Ok(SweepPoint {
            distance_km: d,
            eta: params.eta(),
            report: overall_rate(&params)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut cutoff_km = None;
    for pair in points.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if let (Some(ra), Some(rb)) = (a.report.rate_raw, b.report.rate_raw) {
            if ra > 0.0 && rb <= 0.0 {
                cutoff_km = Some(bisect_cutoff(template, a.distance_km, b.distance_km)?);
                break;
            }
        }
    }
    Ok(Sweep {
        params: *template,
        points,
        cutoff_km,
    })
}

/// Zero crossing of `rate_raw` in `[lo, hi]`, given a positive rate at `lo`.
pub fn bisect_cutoff(template: &ChannelParams, mut lo: f64, mut hi: f64) -> Result<f64> {
    let raw = |d: f64| -> Result<f64> {
        overall_rate(&template.at_distance(d))?
            .unscaled_rate_raw()
            .ok_or_else(|| Error::DegenerateChannel(format!("rate undefined at {d} km")))
    };
    while hi - lo > CUTOFF_RESOLUTION_KM / 2.0 {
        let mid = 0.5 * (lo + hi);
        if raw(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `from, from + step, ..., to` with the endpoint included when it lies on the
/// grid (to within a millionth of a step).
pub fn distance_grid(from_km: f64, to_km: f64, step_km: f64) -> Result<Vec<f64>> {
    if !(from_km.is_finite() && to_km.is_finite() && from_km >= 0.0 && to_km >= from_km) {
        return Err(invalid(format!(
            "distance range [{from_km}, {to_km}] must be non-negative and ordered"
        )));
    }
    if to_km == from_km {
        return Ok(vec![from_km]);
    }
    if !(step_km.is_finite() && step_km > 0.0) {
        return Err(invalid(format!("step_km = {step_km} must be positive")));
    }
    let n = ((to_km - from_km) / step_km + 1e-6).floor() as usize;
    Ok((0..=n).map(|i| from_km + i as f64 * step_km).collect())
}
