//! Channel-selection game: exhaustive equilibrium enumeration, the oriented
//! best-response graph and its sinks, and best-response descent for
//! instances too large to enumerate.
//!
//! Profiles are numbered in mixed radix `S`, little-endian, so player 1 is the
//! fastest-moving digit: index `sum_k c_k S^k` with zero-based channels `c_k`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    cs_to_power, log2, potential_unchecked, utility_unchecked, CsProfile, GainMatrix, GameConfig, NeEntry,
    NeReport,
};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;
pub const GRAPH_EXPORT_CAP: u64 = 1 << 16;
const CHUNK: u64 = 1 << 14;

/// Bijection between profiles and vertex indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileCodec {
    num_players: usize,
    num_channels: usize,
    num_profiles: u64,
}

impl ProfileCodec {
    /// Fails with [`Error::CapExceeded`] when `S^K > cap`.
    pub fn new(num_players: usize, num_channels: usize, cap: u64) -> Result<Self> {
        if num_players == 0 || num_channels == 0 {
            return Err(Error::InvalidConfig("K and S must be positive".into()));
        }
        let exceeded = Error::CapExceeded {
            num_players,
            num_channels,
            cap,
        };
        let num_profiles = u32::try_from(num_players)
            .ok()
            .and_then(|k| (num_channels as u64).checked_pow(k))
            .ok_or(exceeded)?;
        if num_profiles > cap {
            return Err(Error::CapExceeded {
                num_players,
                num_channels,
                cap,
            });
        }
        Ok(Self {
            num_players,
            num_channels,
            num_profiles,
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn num_profiles(&self) -> u64 {
        self.num_profiles
    }

    pub fn encode(&self, profile: &CsProfile) -> Result<u64> {
        if profile.num_players() != self.num_players {
            return Err(Error::Dimension(format!(
                "profile has {} players, expected {}",
                profile.num_players(),
                self.num_players
            )));
        }
        let s = self.num_channels as u64;
        profile.choices().iter().rev().try_fold(0u64, |acc, &c| {
            if c >= self.num_channels {
                return Err(Error::OutOfRange(format!("channel {c}")));
            }
            Ok(acc * s + c as u64)
        })
    }

    pub fn decode(&self, index: u64) -> Result<CsProfile> {
        if index >= self.num_profiles {
            return Err(Error::OutOfRange(format!(
                "vertex {index} of {}",
                self.num_profiles
            )));
        }
        let mut choices = vec![0; self.num_players];
        self.decode_into(index, &mut choices);
        Ok(CsProfile(choices))
    }

    fn decode_into(&self, mut index: u64, choices: &mut [usize]) {
        let s = self.num_channels as u64;
        for c in choices.iter_mut() {
            *c = (index % s) as usize;
            index /= s;
        }
    }

    fn stride(&self, k: usize) -> u64 {
        (self.num_channels as u64).pow(k as u32)
    }

    /// The `K (S - 1)` profiles reachable by one player switching channel.
    pub fn neighbors(&self, index: u64) -> impl Iterator<Item = u64> + '_ {
        let s = self.num_channels as u64;
        (0..self.num_players).flat_map(move |k| {
            let stride = self.stride(k);
            let digit = (index / stride) % s;
            let base = index - digit * stride;
            (0..s).filter(move |&c| c != digit).map(move |c| base + c * stride)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerateOptions {
    /// A switch counts as improving only if the utility gain exceeds this.
    pub tie_tolerance: f64,
    pub cap: u64,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            tie_tolerance: 0.0,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Walks a contiguous index range while keeping the received power per channel.
struct Walker<'a> {
    gains: &'a GainMatrix,
    config: &'a GameConfig,
    choices: Vec<usize>,
    loads: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(codec: &ProfileCodec, gains: &'a GainMatrix, config: &'a GameConfig, start: u64) -> Self {
        let mut choices = vec![0; codec.num_players];
        codec.decode_into(start, &mut choices);
        let mut walker = Self {
            gains,
            config,
            choices,
            loads: vec![0.0; codec.num_channels],
        };
        for s in 0..codec.num_channels {
            walker.refresh(s);
        }
        walker
    }

    fn power(&self, k: usize, s: usize) -> f64 {
        self.config.max_power()[k] * self.gains.get(k, s)
    }

    // Summed in player order, so loads match `model::potential` bit for bit.
    fn refresh(&mut self, s: usize) {
        self.loads[s] = (0..self.choices.len())
            .filter(|&k| self.choices[k] == s)
            .map(|k| self.power(k, s))
            .sum();
    }

    fn advance(&mut self) {
        let s_count = self.loads.len();
        for k in 0..self.choices.len() {
            let old = self.choices[k];
            let new = (old + 1) % s_count;
            self.choices[k] = new;
            self.refresh(old);
            self.refresh(new);
            if new != 0 {
                break;
            }
        }
    }

    fn potential(&self) -> f64 {
        (0..self.loads.len())
            .map(|s| self.config.bandwidth_fraction(s) * log2(self.config.noise_power(s) + self.loads[s]))
            .sum()
    }

    /// Utility gain of player `k` moving to channel `s`.
    fn gain(&self, k: usize, s: usize) -> f64 {
        let c = self.choices[k];
        let own = self.power(k, c);
        let current = self.config.bandwidth_fraction(c)
            * log2(1.0 + own / (self.config.noise_power(c) + (self.loads[c] - own).max(0.0)));
        let alt = self.config.bandwidth_fraction(s)
            * log2(1.0 + self.power(k, s) / (self.config.noise_power(s) + self.loads[s]));
        alt - current
    }

    /// `(is_ne, near_ties)` for the current profile.
    fn check(&self, tie_tolerance: f64) -> (bool, usize) {
        let mut is_ne = true;
        let mut ties = 0;
        for k in 0..self.choices.len() {
            for s in 0..self.loads.len() {
                if s == self.choices[k] {
                    continue;
                }
                let delta = self.gain(k, s);
                if delta > tie_tolerance {
                    is_ne = false;
                } else if delta.abs() <= tie_tolerance {
                    ties += 1;
                }
            }
        }
        (is_ne, ties)
    }
}

fn chunks(num_profiles: u64) -> Vec<(u64, u64)> {
    (0..num_profiles.div_ceil(CHUNK))
        .map(|i| (i * CHUNK, ((i + 1) * CHUNK).min(num_profiles)))
        .collect()
}

/// All pure equilibria by exhaustive unilateral-deviation checks.
pub fn enumerate_cs_ne(gains: &GainMatrix, config: &GameConfig, options: &EnumerateOptions) -> Result<NeReport> {
    if options.tie_tolerance < 0.0 || options.tie_tolerance.is_nan() {
        return Err(Error::InvalidConfig("tie tolerance must be nonnegative".into()));
    }
    check_dims(gains, config)?;
    let codec = ProfileCodec::new(config.num_players(), config.num_channels(), options.cap)?;
    let per_chunk: Vec<(Vec<u64>, usize)> = chunks(codec.num_profiles)
        .into_par_iter()
        .map(|(start, end)| {
            let mut walker = Walker::new(&codec, gains, config, start);
            let mut found = Vec::new();
            let mut ties = 0;
            for index in start..end {
                let (is_ne, t) = walker.check(options.tie_tolerance);
                ties += t;
                if is_ne {
                    found.push(index);
                }
                if index + 1 < end {
                    walker.advance();
                }
            }
            (found, ties)
        })
        .collect();
    let near_ties = per_chunk.iter().map(|(_, t)| t).sum::<usize>() / 2;
    let indices: Vec<u64> = per_chunk.into_iter().flat_map(|(f, _)| f).collect();
    let profiles = indices
        .iter()
        .map(|&i| codec.decode(i))
        .collect::<Result<Vec<_>>>()?;
    let mut report = build_report(gains, config, indices.into_iter().zip(profiles).collect(), true)?;
    report.near_ties = near_ties;
    Ok(report)
}

pub(crate) fn build_report(
    gains: &GainMatrix,
    config: &GameConfig,
    equilibria: Vec<(u64, CsProfile)>,
    exhaustive: bool,
) -> Result<NeReport> {
    let mut entries = equilibria
        .into_iter()
        .map(|(index, profile)| {
            let p = cs_to_power(&profile, config)?;
            let utilities: Vec<f64> = (0..config.num_players())
                .map(|k| utility_unchecked(&p, gains, config, k))
                .collect();
            Ok(NeEntry {
                index,
                choices: profile.one_based(),
                potential: potential_unchecked(&p, gains, config),
                nse: utilities.iter().sum(),
                utilities,
                label: "local".into(),
            })
        })
        .collect::<Result<Vec<NeEntry>>>()?;
    let best = entries
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.potential.total_cmp(&b.1.potential))
        .map(|(i, _)| i);
    if let Some(i) = best {
        entries[i].label = "potential-max".into();
    }
    let bound = ne_upper_bound(config.num_players(), config.num_channels()).l_max;
    Ok(NeReport {
        count: entries.len(),
        equilibria: entries,
        bound: Some(bound),
        exhaustive,
        near_ties: 0,
    })
}

/// The best-response graph: one-player deviations oriented towards strictly
/// larger potential. Neighbours are generated on the fly from the codec; only
/// the potential of every vertex is stored.
#[derive(Debug, Clone)]
pub struct CsGraph {
    codec: ProfileCodec,
    potentials: Vec<f64>,
}

/// Potential of every profile, then the oriented graph over them.
pub fn build_cs_graph(gains: &GainMatrix, config: &GameConfig, cap: u64) -> Result<CsGraph> {
    check_dims(gains, config)?;
    let codec = ProfileCodec::new(config.num_players(), config.num_channels(), cap)?;
    let potentials = chunks(codec.num_profiles)
        .into_par_iter()
        .flat_map_iter(|(start, end)| {
            let mut walker = Walker::new(&codec, gains, config, start);
            (start..end)
                .map(|index| {
                    let phi = walker.potential();
                    if index + 1 < end {
                        walker.advance();
                    }
                    phi
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(CsGraph { codec, potentials })
}

impl CsGraph {
    /// Orients the graph by an arbitrary vertex ordering, given as one value per
    /// vertex in codec order.
    pub fn from_potentials(num_players: usize, num_channels: usize, potentials: Vec<f64>) -> Result<Self> {
        let codec = ProfileCodec::new(num_players, num_channels, u64::MAX)?;
        if potentials.len() as u64 != codec.num_profiles {
            return Err(Error::Dimension(format!(
                "{} potentials for {} vertices",
                potentials.len(),
                codec.num_profiles
            )));
        }
        Ok(Self { codec, potentials })
    }

    pub fn codec(&self) -> &ProfileCodec {
        &self.codec
    }

    pub fn num_vertices(&self) -> u64 {
        self.codec.num_profiles
    }

    /// Every vertex has `K (S - 1)` neighbours.
    pub fn degree(&self) -> usize {
        self.codec.num_players * (self.codec.num_channels - 1)
    }

    pub fn potential(&self, v: u64) -> f64 {
        self.potentials[v as usize]
    }

    pub fn neighbors(&self, v: u64) -> Vec<u64> {
        self.codec.neighbors(v).collect()
    }

    /// Heads of the directed edges leaving `v`.
    pub fn out_neighbors(&self, v: u64) -> Vec<u64> {
        let phi = self.potential(v);
        self.codec.neighbors(v).filter(|&j| self.potential(j) > phi).collect()
    }

    pub fn has_edge(&self, i: u64, j: u64) -> bool {
        self.codec.neighbors(i).any(|n| n == j) && self.potential(j) > self.potential(i)
    }

    /// Vertices with out-degree zero, ascending.
    pub fn sinks(&self) -> Vec<u64> {
        (0..self.num_vertices())
            .into_par_iter()
            .filter(|&v| {
                let phi = self.potential(v);
                self.codec.neighbors(v).all(|j| self.potential(j) <= phi)
            })
            .collect()
    }

    /// All directed edges `(i, j)` in index order; refused above [`GRAPH_EXPORT_CAP`] vertices.
    pub fn edges(&self) -> Result<Vec<(u64, u64)>> {
        self.check_export()?;
        Ok((0..self.num_vertices())
            .flat_map(|i| self.out_neighbors(i).into_iter().map(move |j| (i, j)))
            .collect())
    }

    /// One `"i j"` line per directed edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, j) in self.edges()? {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    /// One `"index: (c_1,...,c_K) φ=value"` line per vertex.
    pub fn write_vertex_table<W: Write>(&self, mut out: W) -> Result<()> {
        self.check_export()?;
        for v in 0..self.num_vertices() {
            writeln!(out, "{v}: {} φ={}", self.codec.decode(v)?, self.potential(v))?;
        }
        Ok(())
    }

    fn check_export(&self) -> Result<()> {
        if self.num_vertices() > GRAPH_EXPORT_CAP {
            return Err(Error::CapExceeded {
                num_players: self.codec.num_players,
                num_channels: self.codec.num_channels,
                cap: GRAPH_EXPORT_CAP,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NeBound {
    /// `1 + (S - 1) * sum_{even i >= 2} C(K, i)`, saturating.
    pub l_max: u128,
}

pub fn ne_upper_bound(num_players: usize, num_channels: usize) -> NeBound {
    let k = num_players as u128;
    let mut even_sum: u128 = 0;
    // C(K, i) built incrementally: C(K, i) = C(K, i - 1) (K - i + 1) / i.
    let mut binom: u128 = 1;
    for i in 1..=k {
        binom = match binom.checked_mul(k - i + 1) {
            Some(v) => v / i,
            None => {
                even_sum = u128::MAX;
                break;
            }
        };
        if i % 2 == 0 {
            even_sum = even_sum.saturating_add(binom);
        }
    }
    let s_minus_one = (num_channels as u128).saturating_sub(1);
    NeBound {
        l_max: s_minus_one.saturating_mul(even_sum).saturating_add(1),
    }
}

/// Number of players on different channels.
pub fn profile_distance(a: &CsProfile, b: &CsProfile) -> Result<usize> {
    if a.num_players() != b.num_players() {
        return Err(Error::Dimension(format!(
            "profiles of length {} and {}",
            a.num_players(),
            b.num_players()
        )));
    }
    Ok(a.choices().iter().zip(b.choices()).filter(|(x, y)| x != y).count())
}

/// Large-`K` approximation `(S - 1) (2 / S)^K` of the bound divided by `S^K`.
pub fn ne_fraction_estimate(num_players: usize, num_channels: usize) -> Result<f64> {
    if num_players == 0 || num_channels < 2 {
        return Err(Error::InvalidConfig("need K >= 1 and S >= 2".into()));
    }
    let s = num_channels as f64;
    Ok((s - 1.0) * (2.0 / s).powi(num_players as i32))
}

pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub profile: CsProfile,
    pub sweeps: usize,
    /// `false` if the sweep cap was hit before reaching a sink.
    pub converged: bool,
}

/// Best-response descent from `start`: players in index order move to their
/// strictly best channel until a full sweep makes no move.
pub fn br_descent(gains: &GainMatrix, config: &GameConfig, start: CsProfile, max_sweeps: usize) -> Result<Descent> {
    check_dims(gains, config)?;
    let start = CsProfile::new(start.0, config.num_channels())?;
    if start.num_players() != config.num_players() {
        return Err(Error::Dimension("start profile has the wrong number of players".into()));
    }
    let mut walker = Walker {
        gains,
        config,
        choices: start.0,
        loads: vec![0.0; config.num_channels()],
    };
    for s in 0..config.num_channels() {
        walker.refresh(s);
    }
    for sweep in 1..=max_sweeps {
        let mut moved = false;
        for k in 0..config.num_players() {
            let current = walker.choices[k];
            let mut best = (current, 0.0);
            for s in 0..config.num_channels() {
                if s != current {
                    let delta = walker.gain(k, s);
                    if delta > best.1 {
                        best = (s, delta);
                    }
                }
            }
            if best.0 != current {
                walker.choices[k] = best.0;
                walker.refresh(current);
                walker.refresh(best.0);
                moved = true;
            }
        }
        if !moved {
            return Ok(Descent {
                profile: CsProfile(walker.choices),
                sweeps: sweep,
                converged: true,
            });
        }
    }
    Ok(Descent {
        profile: CsProfile(walker.choices),
        sweeps: max_sweeps,
        converged: false,
    })
}

/// Distinct sinks reached by descent from `restarts` uniformly random profiles.
/// The report is marked non-exhaustive.
pub fn sample_cs_ne<R: Rng + ?Sized>(
    gains: &GainMatrix,
    config: &GameConfig,
    restarts: usize,
    rng: &mut R,
) -> Result<NeReport> {
    let mut found: Vec<CsProfile> = Vec::new();
    for _ in 0..restarts.max(1) {
        let start = CsProfile(
            (0..config.num_players())
                .map(|_| rng.random_range(0..config.num_channels()))
                .collect(),
        );
        let d = br_descent(gains, config, start, DEFAULT_MAX_SWEEPS)?;
        if d.converged && !found.contains(&d.profile) {
            found.push(d.profile);
        }
    }
    found.sort();
    let s = config.num_channels() as u64;
    let indexed = found
        .into_iter()
        .map(|p| {
            let index = p
                .choices()
                .iter()
                .rev()
                .fold(0u64, |acc, &c| acc.wrapping_mul(s).wrapping_add(c as u64));
            (index, p)
        })
        .collect();
    build_report(gains, config, indexed, false)
}

fn check_dims(gains: &GainMatrix, config: &GameConfig) -> Result<()> {
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
