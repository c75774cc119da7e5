//! Shared data model and the pure evaluation functions every solver builds on.
//!
//! All spectral efficiencies are in bits/s/Hz. Noise powers are always derived
//! as `N0 * B_s`; a configuration never carries `sigma^2` directly.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{Error, Result};

/// Additive slack on the per-player power budget.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// System parameters shared by both games.
#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    max_power: Vec<f64>,
    noise_density: f64,
    bandwidths: Vec<f64>,
    total_bandwidth: f64,
}

impl GameConfig {
    pub fn new(max_power: Vec<f64>, noise_density: f64, bandwidths: Vec<f64>) -> Result<Self> {
        if max_power.is_empty() {
            return Err(Error::InvalidConfig("at least one player is required".into()));
        }
        if bandwidths.is_empty() {
            return Err(Error::InvalidConfig("at least one channel is required".into()));
        }
        if let Some((k, p)) = max_power.iter().enumerate().find(|(_, p)| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidConfig(format!("max power of player {k} must be positive, got {p}")));
        }
        if let Some((s, b)) = bandwidths.iter().enumerate().find(|(_, b)| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidConfig(format!("bandwidth of channel {s} must be positive, got {b}")));
        }
        if !(noise_density > 0.0 && noise_density.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise density must be positive, got {noise_density}"
            )));
        }
        let total_bandwidth = bandwidths.iter().sum();
        Ok(Self {
            max_power,
            noise_density,
            bandwidths,
            total_bandwidth,
        })
    }

    /// Identical players on identical channels.
    pub fn uniform(
        num_players: usize,
        num_channels: usize,
        max_power: f64,
        noise_density: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        Self::new(
            vec![max_power; num_players],
            noise_density,
            vec![bandwidth; num_channels],
        )
    }

    pub fn num_players(&self) -> usize {
        self.max_power.len()
    }

    pub fn num_channels(&self) -> usize {
        self.bandwidths.len()
    }

    pub fn max_power(&self) -> &[f64] {
        &self.max_power
    }

    pub fn noise_density(&self) -> f64 {
        self.noise_density
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn total_bandwidth(&self) -> f64 {
        self.total_bandwidth
    }

    /// `b_s = B_s / B`.
    pub fn bandwidth_fraction(&self, s: usize) -> f64 {
        self.bandwidths[s] / self.total_bandwidth
    }

    pub fn bandwidth_fractions(&self) -> Vec<f64> {
        (0..self.num_channels()).map(|s| self.bandwidth_fraction(s)).collect()
    }

    /// `sigma^2_s = N0 * B_s`.
    pub fn noise_power(&self, s: usize) -> f64 {
        self.noise_density * self.bandwidths[s]
    }

    pub fn noise_powers(&self) -> Vec<f64> {
        (0..self.num_channels()).map(|s| self.noise_power(s)).collect()
    }

    pub fn has_uniform_bandwidths(&self) -> bool {
        self.bandwidths.iter().all(|b| *b == self.bandwidths[0])
    }

    /// Per-channel SNR `p_{k,max} / sigma^2` of player `k`; only defined when
    /// every channel has the same bandwidth (and hence the same noise power).
    pub fn channel_snr(&self, k: usize) -> Option<f64> {
        self.has_uniform_bandwidths()
            .then(|| self.max_power[k] / self.noise_power(0))
    }

    /// Whole-band SNR `10 log10(p_{k,max} / (N0 B))` in dB.
    pub fn band_snr_db(&self, k: usize) -> f64 {
        10.0 * (self.max_power[k] / (self.noise_density * self.total_bandwidth)).log10()
    }

    /// The same system with every power budget multiplied by `factor`.
    pub fn with_scaled_power(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.max_power.iter().map(|p| p * factor).collect(),
            self.noise_density,
            self.bandwidths.clone(),
        )
    }
}

/// Channel power gains `g_{k,s} = |h_{k,s}|^2`, player-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct GainMatrix {
    num_players: usize,
    num_channels: usize,
    data: Vec<f64>,
}

impl GainMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (num_players, num_channels, data) = flatten(rows, "gain matrix")?;
        if let Some(g) = data.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidConfig(format!("gains must be finite and nonnegative, got {g}")));
        }
        Ok(Self {
            num_players,
            num_channels,
            data,
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    #[inline]
    pub fn get(&self, k: usize, s: usize) -> f64 {
        self.data[k * self.num_channels + s]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.num_channels..(k + 1) * self.num_channels]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.num_channels).map(<[f64]>::to_vec).collect()
    }
}

/// Per-channel transmit powers `p_{k,s}` of every player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct PowerProfile {
    num_players: usize,
    num_channels: usize,
    data: Vec<f64>,
}

impl PowerProfile {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (num_players, num_channels, data) = flatten(rows, "power profile")?;
        if let Some(p) = data.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::Infeasible(format!("powers must be finite and nonnegative, got {p}")));
        }
        Ok(Self {
            num_players,
            num_channels,
            data,
        })
    }

    pub fn zeros(num_players: usize, num_channels: usize) -> Self {
        Self {
            num_players,
            num_channels,
            data: vec![0.0; num_players * num_channels],
        }
    }

    /// Every player spreads its budget evenly over all channels.
    pub fn uniform(config: &GameConfig) -> Self {
        let s = config.num_channels();
        let data = config
            .max_power()
            .iter()
            .flat_map(|p| std::iter::repeat_n(p / s as f64, s))
            .collect();
        Self {
            num_players: config.num_players(),
            num_channels: s,
            data,
        }
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    #[inline]
    pub fn get(&self, k: usize, s: usize) -> f64 {
        self.data[k * self.num_channels + s]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.num_channels..(k + 1) * self.num_channels]
    }

    pub fn set_row(&mut self, k: usize, row: &[f64]) {
        self.data[k * self.num_channels..(k + 1) * self.num_channels].copy_from_slice(row);
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.num_channels).map(<[f64]>::to_vec).collect()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &PowerProfile) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Checks nonnegativity and the per-player budgets (with [`FEASIBILITY_SLACK`]).
    pub fn check_feasible(&self, config: &GameConfig) -> Result<()> {
        if self.num_players != config.num_players() || self.num_channels != config.num_channels() {
            return Err(Error::Dimension(format!(
                "profile is {}x{}, config is {}x{}",
                self.num_players,
                self.num_channels,
                config.num_players(),
                config.num_channels()
            )));
        }
        for k in 0..self.num_players {
            let total: f64 = self.row(k).iter().sum();
            if total > config.max_power()[k] + FEASIBILITY_SLACK {
                return Err(Error::Infeasible(format!(
                    "player {k} uses {total} > budget {}",
                    config.max_power()[k]
                )));
            }
        }
        Ok(())
    }
}

impl From<GainMatrix> for Vec<Vec<f64>> {
    fn from(g: GainMatrix) -> Self {
        g.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for GainMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<PowerProfile> for Vec<Vec<f64>> {
    fn from(p: PowerProfile) -> Self {
        p.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for PowerProfile {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

/// Channel-selection profile; entry `k` is the (zero-based) channel used by player `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CsProfile(pub Vec<usize>);

impl CsProfile {
    pub fn new(choices: Vec<usize>, num_channels: usize) -> Result<Self> {
        if let Some((k, c)) = choices.iter().enumerate().find(|(_, c)| **c >= num_channels) {
            return Err(Error::OutOfRange(format!(
                "player {k} selects channel {c}, only {num_channels} channels exist"
            )));
        }
        Ok(Self(choices))
    }

    /// Builds a profile from one-based channel numbers.
    pub fn from_one_based(choices: &[usize], num_channels: usize) -> Result<Self> {
        let zero_based = choices
            .iter()
            .map(|c| {
                c.checked_sub(1)
                    .ok_or_else(|| Error::OutOfRange("channel numbers start at 1".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero_based, num_channels)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|c| c + 1).collect()
    }
}

impl fmt::Display for CsProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c + 1)?;
        }
        write!(f, ")")
    }
}

/// A validated configuration together with a matching gain matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub config: GameConfig,
    pub gains: GainMatrix,
}

impl Instance {
    pub fn new(config: GameConfig, gains: GainMatrix) -> Result<Self> {
        check_gains(&gains, &config)?;
        Ok(Self { config, gains })
    }

    pub fn num_players(&self) -> usize {
        self.config.num_players()
    }

    pub fn num_channels(&self) -> usize {
        self.config.num_channels()
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            num_players: self.num_players(),
            num_channels: self.num_channels(),
            max_power: self.config.max_power().to_vec(),
            noise_density: self.config.noise_density(),
            bandwidths: self.config.bandwidths().to_vec(),
            gains: self.gains.to_rows(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<InstanceFile>(text)?.into_instance()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// JSON interchange document `{K, S, p_max, N0, B, gains}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "K")]
    pub num_players: usize,
    #[serde(rename = "S")]
    pub num_channels: usize,
    #[serde(rename = "p_max")]
    pub max_power: Vec<f64>,
    #[serde(rename = "N0")]
    pub noise_density: f64,
    #[serde(rename = "B")]
    pub bandwidths: Vec<f64>,
    pub gains: Vec<Vec<f64>>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        if self.max_power.len() != self.num_players || self.bandwidths.len() != self.num_channels {
            return Err(Error::Dimension(format!(
                "K={} S={} but p_max has {} entries and B has {}",
                self.num_players,
                self.num_channels,
                self.max_power.len(),
                self.bandwidths.len()
            )));
        }
        let config = GameConfig::new(self.max_power, self.noise_density, self.bandwidths)?;
        Instance::new(config, GainMatrix::from_rows(self.gains)?)
    }
}

/// One equilibrium of the channel-selection game.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NeEntry {
    /// Mixed-radix vertex index (player 1 is the fastest digit).
    pub index: u64,
    /// One-based channel per player.
    pub choices: Vec<usize>,
    pub potential: f64,
    pub utilities: Vec<f64>,
    pub nse: f64,
    /// `"potential-max"` for the global maximizer of the potential, `"local"` otherwise.
    pub label: String,
}

impl NeEntry {
    pub fn profile(&self) -> CsProfile {
        CsProfile(self.choices.iter().map(|c| c - 1).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NeReport {
    pub equilibria: Vec<NeEntry>,
    pub count: usize,
    /// Upper bound on the number of equilibria for this `(K, S)`.
    pub bound: Option<u128>,
    /// `false` when the equilibria were sampled by best-response descent.
    pub exhaustive: bool,
    /// Neighbouring profiles whose potentials are within the tie tolerance.
    pub near_ties: usize,
}

impl NeReport {
    /// The equilibrium with the largest potential.
    pub fn potential_maximizer(&self) -> Option<&NeEntry> {
        self.equilibria
            .iter()
            .max_by(|a, b| a.potential.total_cmp(&b.potential))
    }
}

fn flatten(rows: Vec<Vec<f64>>, what: &str) -> Result<(usize, usize, Vec<f64>)> {
    let num_rows = rows.len();
    let num_cols = rows.first().map_or(0, Vec::len);
    if num_rows == 0 || num_cols == 0 {
        return Err(Error::Dimension(format!("{what} must be non-empty")));
    }
    if let Some(r) = rows.iter().position(|r| r.len() != num_cols) {
        return Err(Error::Dimension(format!("{what} row {r} has a different length")));
    }
    Ok((num_rows, num_cols, rows.into_iter().flatten().collect()))
}

fn check_gains(gains: &GainMatrix, config: &GameConfig) -> Result<()> {
    if gains.num_players() != config.num_players() || gains.num_channels() != config.num_channels() {
        return Err(Error::Dimension(format!(
            "gains are {}x{}, config is {}x{}",
            gains.num_players(),
            gains.num_channels(),
            config.num_players(),
            config.num_channels()
        )));
    }
    Ok(())
}

fn check_dims(profile: &PowerProfile, gains: &GainMatrix, config: &GameConfig) -> Result<()> {
    check_gains(gains, config)?;
    if profile.num_players() != config.num_players() || profile.num_channels() != config.num_channels() {
        return Err(Error::Dimension(format!(
            "profile is {}x{}, config is {}x{}",
            profile.num_players(),
            profile.num_channels(),
            config.num_players(),
            config.num_channels()
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    x.ln() / LN_2
}

/// Total received power `sum_k p_{k,s} g_{k,s}` on channel `s`.
pub(crate) fn received_power(profile: &PowerProfile, gains: &GainMatrix, s: usize) -> f64 {
    (0..profile.num_players())
        .map(|k| profile.get(k, s) * gains.get(k, s))
        .sum()
}

pub(crate) fn sinr_unchecked(
    profile: &PowerProfile,
    gains: &GainMatrix,
    config: &GameConfig,
    k: usize,
    s: usize,
) -> f64 {
    let own = profile.get(k, s) * gains.get(k, s);
    if own == 0.0 {
        return 0.0;
    }
    let interference: f64 = (0..profile.num_players())
        .filter(|&j| j != k)
        .map(|j| profile.get(j, s) * gains.get(j, s))
        .sum();
    own / (config.noise_power(s) + interference)
}

pub(crate) fn utility_unchecked(
    profile: &PowerProfile,
    gains: &GainMatrix,
    config: &GameConfig,
    k: usize,
) -> f64 {
    (0..config.num_channels())
        .map(|s| {
            config.bandwidth_fraction(s) * log2(1.0 + sinr_unchecked(profile, gains, config, k, s))
        })
        .sum()
}

pub(crate) fn potential_unchecked(profile: &PowerProfile, gains: &GainMatrix, config: &GameConfig) -> f64 {
    (0..config.num_channels())
        .map(|s| {
            config.bandwidth_fraction(s)
                * log2(config.noise_power(s) + received_power(profile, gains, s))
        })
        .sum()
}

/// SINR `gamma_{k,s}` of player `k` on channel `s` under single-user decoding.
pub fn sinr(
    profile: &PowerProfile,
    gains: &GainMatrix,
    config: &GameConfig,
    k: usize,
    s: usize,
) -> Result<f64> {
    check_dims(profile, gains, config)?;
    if k >= config.num_players() || s >= config.num_channels() {
        return Err(Error::OutOfRange(format!("(player {k}, channel {s})")));
    }
    Ok(sinr_unchecked(profile, gains, config, k, s))
}

/// Spectral efficiency `u_k = sum_s b_s log2(1 + gamma_{k,s})` of player `k`.
pub fn utility(profile: &PowerProfile, gains: &GainMatrix, config: &GameConfig, k: usize) -> Result<f64> {
    check_dims(profile, gains, config)?;
    if k >= config.num_players() {
        return Err(Error::OutOfRange(format!("player {k}")));
    }
    Ok(utility_unchecked(profile, gains, config, k))
}

/// All players' utilities.
pub fn utilities(profile: &PowerProfile, gains: &GainMatrix, config: &GameConfig) -> Result<Vec<f64>> {
    check_dims(profile, gains, config)?;
    Ok((0..config.num_players())
        .map(|k| utility_unchecked(profile, gains, config, k))
        .collect())
}

/// Exact potential `phi = sum_s b_s log2(sigma^2_s + sum_k p_{k,s} g_{k,s})` shared by both games.
pub fn potential(profile: &PowerProfile, gains: &GainMatrix, config: &GameConfig) -> Result<f64> {
    check_dims(profile, gains, config)?;
    Ok(potential_unchecked(profile, gains, config))
}

/// Network spectral efficiency: the sum of all utilities.
pub fn nse(profile: &PowerProfile, gains: &GainMatrix, config: &GameConfig) -> Result<f64> {
    Ok(utilities(profile, gains, config)?.iter().sum())
}

/// Full-power action of each player on its selected channel.
pub fn cs_to_power(cs: &CsProfile, config: &GameConfig) -> Result<PowerProfile> {
    if cs.num_players() != config.num_players() {
        return Err(Error::Dimension(format!(
            "profile has {} players, config has {}",
            cs.num_players(),
            config.num_players()
        )));
    }
    let s_count = config.num_channels();
    let mut profile = PowerProfile::zeros(config.num_players(), s_count);
    for (k, &c) in cs.choices().iter().enumerate() {
        if c >= s_count {
            return Err(Error::OutOfRange(format!("player {k} selects channel {c}")));
        }
        profile.data[k * s_count + c] = config.max_power()[k];
    }
    Ok(profile)
}
