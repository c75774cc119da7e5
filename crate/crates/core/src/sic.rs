//! Rates under successive interference cancellation at the receiver.

use rand::Rng;
use serde::Serialize;

use crate::cs::{enumerate_cs_ne, sample_cs_ne, EnumerateOptions};
use crate::error::{Error, Result};
use crate::model::{cs_to_power, log2, potential, received_power, GainMatrix, GameConfig, PowerProfile};
use crate::pa::{solve_pa_ne, PaInit, WaterfillParams};

/// `order[i]` is the (zero-based) player decoded in position `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodingOrder(Vec<usize>);

impl DecodingOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &k in &order {
            match seen.get_mut(k) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::InvalidConfig(format!("{order:?} is not a permutation"))),
            }
        }
        Ok(Self(order))
    }

    pub fn identity(num_players: usize) -> Self {
        Self((0..num_players).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SicReport {
    /// Indexed by player, not by decoding position.
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    pub order: Vec<usize>,
    /// `|sum_rate - (phi - sum_s b_s log2 sigma^2_s)|`.
    pub potential_identity_residual: f64,
    /// Set when the evaluated equilibrium was sampled rather than selected from a full enumeration.
    pub degraded: bool,
}

/// `sum_s b_s log2(1 + sum_k p_{k,s} g_{k,s} / sigma^2_s)`.
pub fn sic_nse(profile: &PowerProfile, gains: &GainMatrix, config: &GameConfig) -> Result<f64> {
    potential(profile, gains, config)?;
    Ok((0..config.num_channels())
        .map(|s| config.bandwidth_fraction(s) * log2(1.0 + received_power(profile, gains, s) / config.noise_power(s)))
        .sum())
}

fn noise_constant(config: &GameConfig) -> f64 {
    (0..config.num_channels())
        .map(|s| config.bandwidth_fraction(s) * log2(config.noise_power(s)))
        .sum()
}

/// Per-player rates when players are decoded in `order`; each player only sees
/// interference from players decoded after it.
pub fn sic_user_rates(
    profile: &PowerProfile,
    gains: &GainMatrix,
    config: &GameConfig,
    order: &DecodingOrder,
) -> Result<SicReport> {
    let phi = potential(profile, gains, config)?;
    if order.0.len() != config.num_players() {
        return Err(Error::Dimension(format!(
            "order has {} entries for {} players",
            order.0.len(),
            config.num_players()
        )));
    }
    let mut rates = vec![0.0; config.num_players()];
    for s in 0..config.num_channels() {
        let b = config.bandwidth_fraction(s);
        let mut residual = 0.0;
        // walk from the last decoded player backwards, accumulating interference
        for &k in order.0.iter().rev() {
            let own = profile.get(k, s) * gains.get(k, s);
            rates[k] += b * log2(1.0 + own / (config.noise_power(s) + residual));
            residual += own;
        }
    }
    let sum_rate: f64 = rates.iter().sum();
    Ok(SicReport {
        rates,
        sum_rate,
        order: order.0.clone(),
        potential_identity_residual: (sum_rate - (phi - noise_constant(config))).abs(),
        degraded: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Game {
    PowerAllocation,
    ChannelSelection,
}

/// SIC rates at an equilibrium of the chosen game, decoded in player order.
/// For channel selection the potential-maximizing equilibrium is used; when the
/// profile space exceeds `cap`, the best of `restarts` best-response descents is
/// used instead and the report is flagged `degraded`.
pub fn sic_capacity_at_ne<R: Rng + ?Sized>(
    gains: &GainMatrix,
    config: &GameConfig,
    game: Game,
    cap: u64,
    restarts: usize,
    rng: &mut R,
) -> Result<SicReport> {
    let order = DecodingOrder::identity(config.num_players());
    match game {
        Game::PowerAllocation => {
            let sol = solve_pa_ne(gains, config, &WaterfillParams::default(), PaInit::Uniform)?;
            if !sol.converged {
                return Err(Error::NotConverged {
                    rounds: sol.rounds_used,
                    residual: sol.residual,
                });
            }
            sic_user_rates(&sol.profile, gains, config, &order)
        }
        Game::ChannelSelection => {
            let options = EnumerateOptions {
                cap,
                ..Default::default()
            };
            let (report, degraded) = match enumerate_cs_ne(gains, config, &options) {
                Ok(r) => (r, false),
                Err(Error::CapExceeded { .. }) => (sample_cs_ne(gains, config, restarts, rng)?, true),
                Err(e) => return Err(e),
            };
            let best = report
                .potential_maximizer()
                .ok_or_else(|| Error::InvalidConfig("no equilibrium found".into()))?;
            let profile = cs_to_power(&best.profile(), config)?;
            let mut out = sic_user_rates(&profile, gains, config, &order)?;
            out.degraded = degraded;
            Ok(out)
        }
    }
}
