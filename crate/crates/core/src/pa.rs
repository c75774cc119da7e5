//! Power-allocation game: water-filling best responses and the equilibrium
//! reached by round-robin best-response dynamics.
//!
//! Because the game has an exact potential that is concave in the profile,
//! the fixed point found here is also the potential maximizer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GainMatrix, GameConfig, PowerProfile};
use crate::waterfill::water_fill;

/// Numerical controls for the best-response solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterfillParams {
    /// Allowed gap between allocated power and budget, relative to `max(p_max, 1)`.
    pub bisection_tolerance: f64,
    pub max_bisection_iters: usize,
    /// Max-norm profile change per round below which the sweep stops.
    pub br_sweep_tolerance: f64,
    pub max_rounds: usize,
}

impl Default for WaterfillParams {
    fn default() -> Self {
        Self {
            bisection_tolerance: 1e-13,
            max_bisection_iters: 200,
            br_sweep_tolerance: 1e-9,
            max_rounds: 100_000,
        }
    }
}

impl WaterfillParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bisection_tolerance > 0.0 && self.br_sweep_tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_bisection_iters == 0 || self.max_rounds == 0 {
            return Err(Error::InvalidConfig("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

/// A single player's water-filling reply.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub powers: Vec<f64>,
    /// Set when every gain of the player is zero; `powers` is then all zeros.
    pub inactive: bool,
}

/// Water-filling best response of player `k` to the other rows of `others`
/// (row `k` itself is ignored).
pub fn waterfill_br(
    gains: &GainMatrix,
    config: &GameConfig,
    k: usize,
    others: &PowerProfile,
    params: &WaterfillParams,
) -> Result<BestResponse> {
    check(gains, config, others)?;
    if k >= config.num_players() {
        return Err(Error::OutOfRange(format!("player {k}")));
    }
    best_response(gains, config, k, others, params)
}

fn best_response(
    gains: &GainMatrix,
    config: &GameConfig,
    k: usize,
    others: &PowerProfile,
    params: &WaterfillParams,
) -> Result<BestResponse> {
    let num_channels = config.num_channels();
    if gains.row(k).iter().all(|&g| g == 0.0) {
        return Ok(BestResponse {
            powers: vec![0.0; num_channels],
            inactive: true,
        });
    }
    let weights = config.bandwidth_fractions();
    let floors: Vec<f64> = (0..num_channels)
        .map(|s| {
            let g = gains.get(k, s);
            if g == 0.0 {
                return f64::INFINITY;
            }
            let interference: f64 = (0..config.num_players())
                .filter(|&j| j != k)
                .map(|j| others.get(j, s) * gains.get(j, s))
                .sum();
            (config.noise_power(s) + interference) / g
        })
        .collect();
    let fill = water_fill(
        &weights,
        &floors,
        config.max_power()[k],
        params.bisection_tolerance,
        params.max_bisection_iters,
    )?;
    Ok(BestResponse {
        powers: fill.amounts,
        inactive: false,
    })
}

/// Starting point of the best-response dynamics.
#[derive(Debug, Clone, Default)]
pub enum PaInit {
    /// `p_{k,max} / S` on every channel.
    #[default]
    Uniform,
    Profile(PowerProfile),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaSolution {
    pub profile: PowerProfile,
    #[serde(rename = "rounds")]
    pub rounds_used: usize,
    /// Max-norm distance between the profile and its own best responses.
    pub residual: f64,
    pub converged: bool,
}

/// Runs sequential best responses (players in index order, every round) until a
/// round changes the profile by less than the sweep tolerance and the profile
/// verifies as a fixed point. Never errors on non-convergence; check `converged`.
pub fn solve_pa_ne(
    gains: &GainMatrix,
    config: &GameConfig,
    params: &WaterfillParams,
    initial: PaInit,
) -> Result<PaSolution> {
    params.validate()?;
    let mut profile = match initial {
        PaInit::Uniform => PowerProfile::uniform(config),
        PaInit::Profile(p) => {
            p.check_feasible(config)?;
            p
        }
    };
    check(gains, config, &profile)?;

    let mut residual = f64::INFINITY;
    for round in 1..=params.max_rounds {
        let mut change: f64 = 0.0;
        for k in 0..config.num_players() {
            let br = best_response(gains, config, k, &profile, params)?;
            for (old, new) in profile.row(k).iter().zip(&br.powers) {
                change = change.max((old - new).abs());
            }
            profile.set_row(k, &br.powers);
        }
        if change < params.br_sweep_tolerance {
            residual = fixed_point_residual(&profile, gains, config, params)?.0;
            if residual <= params.br_sweep_tolerance {
                return Ok(PaSolution {
                    profile,
                    rounds_used: round,
                    residual,
                    converged: true,
                });
            }
        }
    }
    if !residual.is_finite() {
        residual = fixed_point_residual(&profile, gains, config, params)?.0;
    }
    Ok(PaSolution {
        profile,
        rounds_used: params.max_rounds,
        residual,
        converged: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaVerification {
    /// Max-norm deviation from the best response, per player.
    pub per_player: Vec<f64>,
    pub residual: f64,
    pub is_ne: bool,
}

/// Checks whether `profile` is a fixed point of the water-filling map.
pub fn verify_pa_ne(
    profile: &PowerProfile,
    gains: &GainMatrix,
    config: &GameConfig,
    tol: f64,
) -> Result<PaVerification> {
    check(gains, config, profile)?;
    let (residual, per_player) = fixed_point_residual(profile, gains, config, &WaterfillParams::default())?;
    Ok(PaVerification {
        per_player,
        residual,
        is_ne: residual <= tol,
    })
}

fn fixed_point_residual(
    profile: &PowerProfile,
    gains: &GainMatrix,
    config: &GameConfig,
    params: &WaterfillParams,
) -> Result<(f64, Vec<f64>)> {
    let per_player = (0..config.num_players())
        .map(|k| {
            let br = best_response(gains, config, k, profile, params)?;
            Ok(br
                .powers
                .iter()
                .zip(profile.row(k))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((per_player.iter().copied().fold(0.0, f64::max), per_player))
}

fn check(gains: &GainMatrix, config: &GameConfig, profile: &PowerProfile) -> Result<()> {
    let dims = |r: usize, c: usize| r == config.num_players() && c == config.num_channels();
    if !dims(gains.num_players(), gains.num_channels()) || !dims(profile.num_players(), profile.num_channels()) {
        return Err(Error::Dimension(format!(
            "config is {}x{}, gains {}x{}, profile {}x{}",
            config.num_players(),
            config.num_channels(),
            gains.num_players(),
            gains.num_channels(),
            profile.num_players(),
            profile.num_channels()
        )));
    }
    Ok(())
}
