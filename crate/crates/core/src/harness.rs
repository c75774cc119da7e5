//! Seeded Monte-Carlo experiments over Rayleigh-faded instances.
//!
//! Trial `t` of a run with seed `seed` always draws from ChaCha8 stream `t` of
//! `seed`, so results do not depend on thread scheduling. Trials run in
//! parallel, are collected in index order and reduced sequentially, which keeps
//! every output table bit-identical across runs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{empirical_fractions, solve_fractions, LargeSystemParams};
use crate::cs::{enumerate_cs_ne, ne_upper_bound, sample_cs_ne, EnumerateOptions, ProfileCodec, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::model::{nse, GainMatrix, GameConfig};
use crate::pa::{solve_pa_ne, PaInit, WaterfillParams};

/// Bandwidth fractions used by the fraction experiment.
pub const FRACTION_BANDWIDTHS: [f64; 6] = [0.25, 0.11, 0.20, 0.05, 0.25, 0.14];

/// `g = |h|^2` with `h` circularly symmetric complex Gaussian of unit variance,
/// i.e. i.i.d. unit-mean exponential gains.
pub fn sample_gains<R: Rng + ?Sized>(num_players: usize, num_channels: usize, rng: &mut R) -> GainMatrix {
    let rows = (0..num_players)
        .map(|_| {
            (0..num_channels)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    0.5 * (re * re + im * im)
                })
                .collect()
        })
        .collect();
    GainMatrix::from_rows(rows).expect("sampled gains are finite and nonnegative")
}

/// The random stream of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Configuration whose whole-band SNR `p_max / (N0 B)` is `snr_db`:
/// `N0 = 1`, total bandwidth 1 split as `fractions`, `p_max = 10^(snr_db/10)`.
pub fn band_config(num_players: usize, fractions: &[f64], snr_db: f64) -> Result<GameConfig> {
    GameConfig::new(
        vec![10f64.powf(snr_db / 10.0); num_players],
        1.0,
        fractions.to_vec(),
    )
}

/// `S` equal channels whose per-channel SNR `p_max / sigma^2` is `snr_db`:
/// total bandwidth 1, `N0 = S` so that `sigma^2 = 1`, `p_max = 10^(snr_db/10)`.
pub fn channel_config(num_players: usize, num_channels: usize, snr_db: f64) -> Result<GameConfig> {
    GameConfig::new(
        vec![10f64.powf(snr_db / 10.0); num_players],
        num_channels as f64,
        vec![1.0 / num_channels as f64; num_channels],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NseVsSnr,
    NseVsLoad,
    NeCountPmf,
    Fractions,
}

/// JSON experiment description. Fields irrelevant to `kind` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Number of players (fixed for `nse_vs_snr`, `ne_count_pmf`, `fractions`).
    #[serde(rename = "K", default)]
    pub num_players: Option<usize>,
    /// Number of channels (fixed for `nse_vs_load`, `ne_count_pmf`).
    #[serde(rename = "S", default)]
    pub num_channels: Option<usize>,
    /// Loads `eta = K / S`.
    #[serde(default)]
    pub loads: Vec<f64>,
    /// SNR points in dB. Per-channel `p_max / sigma^2` for the NSE and
    /// equilibrium-count runs, whole-band `p_max / (N0 B)` for `fractions`.
    #[serde(default)]
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
    /// Largest profile space enumerated exhaustively.
    #[serde(default = "default_cap")]
    pub cap: u64,
    /// Best-response descents per trial when the space exceeds `cap`.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Channel bandwidth fractions for `fractions`.
    #[serde(default)]
    pub bandwidths: Option<Vec<f64>>,
}

fn default_trials() -> usize {
    500
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

fn default_restarts() -> usize {
    8
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            num_players: None,
            num_channels: None,
            loads: Vec::new(),
            snr_grid_db: Vec::new(),
            trials: default_trials(),
            seed: 0,
            output_path: None,
            cap: default_cap(),
            restarts: default_restarts(),
            bandwidths: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1");
        }
        match self.kind {
            ExperimentKind::NseVsSnr => {
                if self.num_players.unwrap_or(0) == 0 || self.loads.is_empty() || self.snr_grid_db.is_empty() {
                    return fail("nse_vs_snr needs K, loads and snr_grid_db");
                }
            }
            ExperimentKind::NseVsLoad => {
                if self.num_channels.unwrap_or(0) == 0 || self.loads.is_empty() || self.snr_grid_db.is_empty() {
                    return fail("nse_vs_load needs S, loads and snr_grid_db");
                }
            }
            ExperimentKind::NeCountPmf => {
                let (Some(k), Some(s)) = (self.num_players, self.num_channels) else {
                    return fail("ne_count_pmf needs K and S");
                };
                if self.snr_grid_db.is_empty() {
                    return fail("ne_count_pmf needs snr_grid_db");
                }
                ProfileCodec::new(k, s, self.cap)?;
            }
            ExperimentKind::Fractions => {
                if self.num_players.unwrap_or(0) == 0 || self.snr_grid_db.is_empty() {
                    return fail("fractions needs K and snr_grid_db");
                }
            }
        }
        if self.loads.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return fail("loads must be positive");
        }
        Ok(())
    }
}

/// Outcome of one draw.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub draw_index: u64,
    pub nse_pa: f64,
    /// NSE at the potential-maximizing channel-selection equilibrium.
    pub nse_cs_best: f64,
    /// Smallest NSE over the equilibria found.
    pub nse_cs_worst: f64,
    pub ne_count: usize,
    /// `false` when equilibria were sampled by best-response descent.
    pub exhaustive: bool,
    /// Largest potential over the equilibria found.
    pub best_potential: f64,
}

/// Solves both games on one draw.
pub fn run_trial(
    config: &GameConfig,
    gains: &GainMatrix,
    draw_index: u64,
    cap: u64,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TrialResult> {
    let pa = solve_pa_ne(gains, config, &WaterfillParams::default(), PaInit::Uniform)?;
    if !pa.converged {
        return Err(Error::NotConverged {
            rounds: pa.rounds_used,
            residual: pa.residual,
        });
    }
    let options = EnumerateOptions {
        cap,
        ..Default::default()
    };
    let report = match enumerate_cs_ne(gains, config, &options) {
        Err(Error::CapExceeded { .. }) => sample_cs_ne(gains, config, restarts, rng)?,
        other => other?,
    };
    let best = report
        .potential_maximizer()
        .ok_or_else(|| Error::InvalidConfig("no channel-selection equilibrium found".into()))?;
    Ok(TrialResult {
        draw_index,
        nse_pa: nse(&pa.profile, gains, config)?,
        nse_cs_best: best.nse,
        nse_cs_worst: report.equilibria.iter().map(|e| e.nse).fold(f64::INFINITY, f64::min),
        ne_count: report.count,
        exhaustive: report.exhaustive,
        best_potential: best.potential,
    })
}

/// Runs `trials` draws under `config`. Failed trials are returned as errors
/// in their slot.
pub fn run_point(config: &GameConfig, spec: &ExperimentSpec) -> Vec<Result<TrialResult>> {
    let (k, s) = (config.num_players(), config.num_channels());
    (0..spec.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(spec.seed, t);
            let gains = sample_gains(k, s, &mut rng);
            run_trial(config, &gains, t, spec.cap, spec.restarts, &mut rng)
        })
        .collect()
}

/// Mean, sample standard deviation and standard error of the mean.
pub fn mean_std_se(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt(), var.sqrt() / n.sqrt())
}

/// One row of the NSE tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsePoint {
    pub load: f64,
    #[serde(rename = "K")]
    pub num_players: usize,
    #[serde(rename = "S")]
    pub num_channels: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub failures: usize,
    pub nse_pa_mean: f64,
    pub nse_pa_std: f64,
    pub nse_pa_se: f64,
    pub nse_cs_mean: f64,
    pub nse_cs_std: f64,
    pub nse_cs_se: f64,
    pub nse_cs_worst_mean: f64,
    /// `exhaustive` or `sampled`.
    pub cs_mode: String,
}

fn summarize(load: f64, k: usize, s: usize, snr_db: f64, results: Vec<Result<TrialResult>>) -> NsePoint {
    let trials = results.len();
    let ok: Vec<TrialResult> = results.into_iter().filter_map(|r| r.ok()).collect();
    let pick = |f: fn(&TrialResult) -> f64| ok.iter().map(f).collect::<Vec<f64>>();
    let (pa_mean, pa_std, pa_se) = mean_std_se(&pick(|t| t.nse_pa));
    let (cs_mean, cs_std, cs_se) = mean_std_se(&pick(|t| t.nse_cs_best));
    let (worst_mean, _, _) = mean_std_se(&pick(|t| t.nse_cs_worst));
    NsePoint {
        load,
        num_players: k,
        num_channels: s,
        snr_db,
        trials,
        failures: trials - ok.len(),
        nse_pa_mean: pa_mean,
        nse_pa_std: pa_std,
        nse_pa_se: pa_se,
        nse_cs_mean: cs_mean,
        nse_cs_std: cs_std,
        nse_cs_se: cs_se,
        nse_cs_worst_mean: worst_mean,
        cs_mode: if ok.iter().all(|t| t.exhaustive) { "exhaustive" } else { "sampled" }.into(),
    }
}

fn rounded(x: f64) -> Result<usize> {
    let n = x.round();
    if n < 1.0 {
        return Err(Error::InvalidConfig(format!("load gives {x} < 1 players or channels")));
    }
    Ok(n as usize)
}

/// For each load `eta`, `S = round(K / eta)` channels; one row per load and SNR.
pub fn run_nse_vs_snr(spec: &ExperimentSpec) -> Result<Vec<NsePoint>> {
    spec.validate()?;
    let k = spec.num_players.unwrap_or_default();
    let mut rows = Vec::new();
    for &load in &spec.loads {
        let s = rounded(k as f64 / load)?;
        for &snr_db in &spec.snr_grid_db {
            let results = run_point(&channel_config(k, s, snr_db)?, spec);
            rows.push(summarize(load, k, s, snr_db, results));
        }
    }
    Ok(rows)
}

/// For each load `eta`, `K = round(eta S)` players; one row per SNR and load.
pub fn run_nse_vs_load(spec: &ExperimentSpec) -> Result<Vec<NsePoint>> {
    spec.validate()?;
    let s = spec.num_channels.unwrap_or_default();
    let mut rows = Vec::new();
    for &snr_db in &spec.snr_grid_db {
        for &load in &spec.loads {
            let k = rounded(load * s as f64)?;
            let results = run_point(&channel_config(k, s, snr_db)?, spec);
            rows.push(summarize(load, k, s, snr_db, results));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfRow {
    pub snr_db: f64,
    pub ne_count: usize,
    pub occurrences: usize,
    pub probability: f64,
    pub bound: u128,
}

/// Empirical distribution of the number of equilibria, per SNR.
/// Rows cover every count from 1 to the bound.
pub fn run_ne_count_pmf(spec: &ExperimentSpec) -> Result<Vec<PmfRow>> {
    spec.validate()?;
    let (k, s) = (spec.num_players.unwrap_or_default(), spec.num_channels.unwrap_or_default());
    let bound = ne_upper_bound(k, s).l_max;
    let mut rows = Vec::new();
    for &snr_db in &spec.snr_grid_db {
        let config = channel_config(k, s, snr_db)?;
        let options = EnumerateOptions {
            cap: spec.cap,
            ..Default::default()
        };
        let counts = (0..spec.trials as u64)
            .into_par_iter()
            .map(|t| {
                let gains = sample_gains(k, s, &mut trial_rng(spec.seed, t));
                enumerate_cs_ne(&gains, &config, &options).map(|r| r.count)
            })
            .collect::<Result<Vec<usize>>>()?;
        let mut histogram = BTreeMap::new();
        for c in counts {
            *histogram.entry(c).or_insert(0usize) += 1;
        }
        let top = (bound.min(usize::MAX as u128) as usize).max(*histogram.keys().last().unwrap_or(&1));
        for count in 1..=top {
            let occurrences = histogram.get(&count).copied().unwrap_or(0);
            rows.push(PmfRow {
                snr_db,
                ne_count: count,
                occurrences,
                probability: occurrences as f64 / spec.trials as f64,
                bound,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionRow {
    pub snr_db: f64,
    /// One-based.
    pub channel: usize,
    pub b_s: f64,
    pub x_formula: f64,
    pub x_empirical_mean: f64,
    pub x_empirical_std: f64,
}

/// Share of players per channel at sampled channel-selection equilibria versus
/// the large-system prediction. Bandwidth fraction `b_s` on channel `s`,
/// `mu = B / K`, unit-mean gains.
pub fn run_fractions(spec: &ExperimentSpec) -> Result<Vec<FractionRow>> {
    spec.validate()?;
    let k = spec.num_players.unwrap_or_default();
    let b = spec.bandwidths.clone().unwrap_or_else(|| FRACTION_BANDWIDTHS.to_vec());
    let mut rows = Vec::new();
    for &snr_db in &spec.snr_grid_db {
        let config = band_config(k, &b, snr_db)?;
        let params = LargeSystemParams::rayleigh(
            config.total_bandwidth() / k as f64,
            config.bandwidth_fractions(),
            config.max_power()[0],
            config.noise_density(),
        )?;
        let predicted = solve_fractions(&params, 1e-12)?;
        let samples = (0..spec.trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(spec.seed, t);
                let gains = sample_gains(k, b.len(), &mut rng);
                let report = match enumerate_cs_ne(&gains, &config, &EnumerateOptions { cap: spec.cap, ..Default::default() }) {
                    Err(Error::CapExceeded { .. }) => sample_cs_ne(&gains, &config, 1, &mut rng)?,
                    other => other?,
                };
                let ne = report
                    .potential_maximizer()
                    .ok_or_else(|| Error::InvalidConfig("no equilibrium found".into()))?;
                Ok(empirical_fractions(&ne.profile(), &config)?.x)
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        for s in 0..b.len() {
            let column: Vec<f64> = samples.iter().map(|x| x[s]).collect();
            let (mean, std, _) = mean_std_se(&column);
            rows.push(FractionRow {
                snr_db,
                channel: s + 1,
                b_s: config.bandwidth_fraction(s),
                x_formula: predicted.x[s],
                x_empirical_mean: mean,
                x_empirical_std: std,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Result table of any experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Nse(Vec<NsePoint>),
    Pmf(Vec<PmfRow>),
    Fractions(Vec<FractionRow>),
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    Ok(match spec.kind {
        ExperimentKind::NseVsSnr => ExperimentOutput::Nse(run_nse_vs_snr(spec)?),
        ExperimentKind::NseVsLoad => ExperimentOutput::Nse(run_nse_vs_load(spec)?),
        ExperimentKind::NeCountPmf => ExperimentOutput::Pmf(run_ne_count_pmf(spec)?),
        ExperimentKind::Fractions => ExperimentOutput::Fractions(run_fractions(spec)?),
    })
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

impl ExperimentOutput {
    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match self {
            ExperimentOutput::Nse(r) => write_rows(r, format, out),
            ExperimentOutput::Pmf(r) => write_rows(r, format, out),
            ExperimentOutput::Fractions(r) => write_rows(r, format, out),
        }
    }

    pub fn write_to_path(&self, format: Format, path: &Path) -> Result<()> {
        let file = BufWriter::new(File::create(path)?);
        self.write(format, file)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(Format::Csv, &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_moments() {
        let draws: Vec<f64> = (0..100u64)
            .into_par_iter()
            .flat_map_iter(|t| {
                let g = sample_gains(100, 100, &mut trial_rng(7, t));
                (0..100).flat_map(move |k| g.row(k).to_vec())
            })
            .collect();
        assert_eq!(draws.len(), 1_000_000);
        let (mean, std, _) = mean_std_se(&draws);
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!((std * std - 1.0).abs() < 0.02, "variance {}", std * std);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = sample_gains(3, 4, &mut trial_rng(42, 5));
        let b = sample_gains(3, 4, &mut trial_rng(42, 5));
        let c = sample_gains(3, 4, &mut trial_rng(42, 6));
        let d = sample_gains(3, 4, &mut trial_rng(43, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn band_config_snr() {
        let c = band_config(3, &[0.5, 0.5], 10.0).unwrap();
        assert!((c.band_snr_db(0) - 10.0).abs() < 1e-12);
        assert_eq!(c.noise_powers(), vec![0.5, 0.5]);
    }

    #[test]
    fn channel_config_snr() {
        let c = channel_config(4, 5, 20.0).unwrap();
        assert_eq!(c.bandwidth_fractions(), vec![0.2; 5]);
        for s in 0..5 {
            assert!((c.noise_power(s) - 1.0).abs() < 1e-15);
        }
        assert!((c.channel_snr(0).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn moments() {
        let (m, s, se) = mean_std_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((se - s / 2.0).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::new(ExperimentKind::NeCountPmf);
        assert!(spec.validate().is_err());
        spec.num_players = Some(3);
        spec.num_channels = Some(2);
        spec.snr_grid_db = vec![0.0];
        assert!(spec.validate().is_ok());
        spec.trials = 0;
        assert!(spec.validate().is_err());
        spec.trials = 1;
        spec.num_players = Some(30);
        assert!(matches!(spec.validate(), Err(Error::CapExceeded { .. })));

        let parsed = ExperimentSpec::from_json(
            r#"{"kind":"nse_vs_snr","K":10,"loads":[0.5,1.0],"snr_grid_db":[0,10],"seed":3}"#,
        )
        .unwrap();
        assert_eq!(parsed.kind, ExperimentKind::NseVsSnr);
        assert_eq!(parsed.trials, 500);
        assert_eq!(parsed.num_players, Some(10));
        assert!(parsed.validate().is_ok());
    }

    #[test]
    fn trial_invariants() {
        let config = channel_config(3, 3, 10.0).unwrap();
        for t in 0..50 {
            let mut rng = trial_rng(1, t);
            let gains = sample_gains(3, 3, &mut rng);
            let r = run_trial(&config, &gains, t, DEFAULT_ENUMERATION_CAP, 4, &mut rng).unwrap();
            assert!(r.nse_cs_best >= r.nse_cs_worst);
            assert!(r.ne_count >= 1 && r.ne_count as u128 <= ne_upper_bound(3, 3).l_max);
            assert!(r.exhaustive);
            let full = enumerate_cs_ne(&gains, &config, &EnumerateOptions::default()).unwrap();
            let max_phi = full.equilibria.iter().map(|e| e.potential).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(r.best_potential, max_phi);
        }
    }

    #[test]
    fn pmf_rows_sum_to_one() {
        let spec = ExperimentSpec {
            num_players: Some(3),
            num_channels: Some(2),
            snr_grid_db: vec![-30.0, 10.0],
            trials: 200,
            seed: 9,
            ..ExperimentSpec::new(ExperimentKind::NeCountPmf)
        };
        let rows = run_ne_count_pmf(&spec).unwrap();
        for snr in [-30.0, 10.0] {
            let total: f64 = rows.iter().filter(|r| r.snr_db == snr).map(|r| r.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert_eq!(rows.iter().filter(|r| r.snr_db == snr).count(), 4);
        }
    }

    #[test]
    fn nse_tables_are_deterministic() {
        let spec = ExperimentSpec {
            num_channels: Some(3),
            loads: vec![1.0, 2.0],
            snr_grid_db: vec![0.0],
            trials: 20,
            seed: 5,
            ..ExperimentSpec::new(ExperimentKind::NseVsLoad)
        };
        let a = run_experiment(&spec).unwrap().to_csv_string().unwrap();
        let b = run_experiment(&spec).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b);
        let header = a.lines().next().unwrap();
        assert!(header.starts_with("load,K,S,snr_db,trials,failures,nse_pa_mean"));
        assert_eq!(a.lines().count(), 3);
    }
}
