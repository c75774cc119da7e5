//! Large-system limit of the channel-selection game: as `K -> inf` with
//! `B / K -> mu`, the potential depends on the profile only through the
//! fraction `x_s` of players on each channel.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{log2, CsProfile, GameConfig};
use crate::waterfill::water_fill;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargeSystemParams {
    /// Limiting bandwidth per player `B / K`.
    pub mu: f64,
    /// Bandwidth fractions `b_s`.
    pub b: Vec<f64>,
    /// Mean channel gain per channel.
    pub omega: Vec<f64>,
    pub p_max: f64,
    pub n0: f64,
}

impl LargeSystemParams {
    pub fn new(mu: f64, b: Vec<f64>, omega: Vec<f64>, p_max: f64, n0: f64) -> Result<Self> {
        if b.is_empty() || b.len() != omega.len() {
            return Err(Error::Dimension(format!("{} fractions and {} mean gains", b.len(), omega.len())));
        }
        if b.iter().any(|v| !(*v > 0.0)) || (b.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("bandwidth fractions must be positive and sum to 1".into()));
        }
        if omega.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig("mean gains must be positive".into()));
        }
        for (name, v) in [("mu", mu), ("p_max", p_max), ("N0", n0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { mu, b, omega, p_max, n0 })
    }

    /// Unit-mean Rayleigh fading on every channel.
    pub fn rayleigh(mu: f64, b: Vec<f64>, p_max: f64, n0: f64) -> Result<Self> {
        let omega = vec![1.0; b.len()];
        Self::new(mu, b, omega, p_max, n0)
    }

    pub fn num_channels(&self) -> usize {
        self.b.len()
    }

    fn floor(&self, s: usize) -> f64 {
        self.mu * self.n0 * self.b[s]
    }

    fn signal(&self, s: usize) -> f64 {
        self.p_max * self.omega[s]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionVector {
    pub x: Vec<f64>,
}

/// `sum_s b_s log2(mu N0 b_s + x_s p_max Omega_s)`, with the `S log2 K` constant dropped.
pub fn asymptotic_potential(x: &FractionVector, params: &LargeSystemParams) -> Result<f64> {
    check_len(x, params)?;
    Ok((0..params.num_channels())
        .map(|s| params.b[s] * log2(params.floor(s) + x.x[s] * params.signal(s)))
        .sum())
}

pub fn asymptotic_gradient(x: &FractionVector, params: &LargeSystemParams) -> Result<Vec<f64>> {
    check_len(x, params)?;
    Ok(marginals(x, params)
        .into_iter()
        .map(|m| m / std::f64::consts::LN_2)
        .collect())
}

/// `b_s p_max Omega_s / (mu N0 b_s + x_s p_max Omega_s)`.
fn marginals(x: &FractionVector, params: &LargeSystemParams) -> Vec<f64> {
    (0..params.num_channels())
        .map(|s| params.b[s] * params.signal(s) / (params.floor(s) + x.x[s] * params.signal(s)))
        .collect()
}

/// Maximizes the asymptotic potential over the simplex:
/// `x_s = b_s [level - mu N0 / (p_max Omega_s)]^+` with one level for all channels.
pub fn solve_fractions(params: &LargeSystemParams, tol: f64) -> Result<FractionVector> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    let floors: Vec<f64> = (0..params.num_channels())
        .map(|s| params.b[s] * params.mu * params.n0 / params.signal(s))
        .collect();
    let fill = water_fill(&params.b, &floors, 1.0, tol.min(1e-13), 400)?;
    Ok(FractionVector { x: fill.amounts })
}

/// Largest violation of the optimality conditions: active channels must share
/// one marginal value, inactive ones must not exceed it. Relative to that value.
pub fn kkt_residual(x: &FractionVector, params: &LargeSystemParams) -> Result<f64> {
    check_len(x, params)?;
    let m = marginals(x, params);
    let active: Vec<f64> = (0..m.len()).filter(|&s| x.x[s] > 0.0).map(|s| m[s]).collect();
    if active.is_empty() {
        return Ok(f64::INFINITY);
    }
    let hi = active.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = active.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / hi;
    let excess = (0..m.len())
        .filter(|&s| x.x[s] == 0.0)
        .map(|s| ((m[s] - lo) / hi).max(0.0))
        .fold(0.0, f64::max);
    Ok(spread.max(excess))
}

/// Share of players on each channel.
pub fn empirical_fractions(profile: &CsProfile, config: &GameConfig) -> Result<FractionVector> {
    if profile.num_players() != config.num_players() {
        return Err(Error::Dimension(format!(
            "profile has {} players, config has {}",
            profile.num_players(),
            config.num_players()
        )));
    }
    let mut x = vec![0.0; config.num_channels()];
    for &c in profile.choices() {
        *x.get_mut(c).ok_or_else(|| Error::OutOfRange(format!("channel {c}")))? += 1.0;
    }
    let k = config.num_players() as f64;
    Ok(FractionVector {
        x: x.into_iter().map(|n| n / k).collect(),
    })
}

fn check_len(x: &FractionVector, params: &LargeSystemParams) -> Result<()> {
    if x.x.len() != params.num_channels() {
        return Err(Error::Dimension(format!(
            "{} fractions for {} channels",
            x.x.len(),
            params.num_channels()
        )));
    }
    Ok(())
}
