//! Closed-form equilibria for two players on two equal-bandwidth channels.
//!
//! All region tests are written in product form `a >= b` with
//! `psi(x) = 1 + SNR x`, so zero gains never cause divisions. Each test is
//! scored by a relative margin `(a - b) / max(a, b)`; a region holds when all
//! of its margins are at least `-tol`.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{nse, CsProfile, GainMatrix, GameConfig, PowerProfile};

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-12;
/// Relative size of `g12 g21 - g11 g22` below which the quad is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelQuad {
    pub g11: f64,
    pub g12: f64,
    pub g21: f64,
    pub g22: f64,
    pub p_max: f64,
    pub sigma2: f64,
}

impl ChannelQuad {
    pub fn new(g: [f64; 4], p_max: f64, sigma2: f64) -> Result<Self> {
        if g.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidConfig(format!("gains must be finite and nonnegative: {g:?}")));
        }
        if !(p_max > 0.0 && p_max.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidConfig("p_max and sigma2 must be positive".into()));
        }
        Ok(Self {
            g11: g[0],
            g12: g[1],
            g21: g[2],
            g22: g[3],
            p_max,
            sigma2,
        })
    }

    /// Quad with unit noise and `p_max = snr`.
    pub fn with_snr(g: [f64; 4], snr: f64) -> Result<Self> {
        Self::new(g, snr, 1.0)
    }

    /// Reads a two-player two-channel instance with equal budgets and bandwidths.
    pub fn from_instance(gains: &GainMatrix, config: &GameConfig) -> Result<Self> {
        if config.num_players() != 2 || config.num_channels() != 2 {
            return Err(Error::Dimension("closed forms need K = S = 2".into()));
        }
        if !config.has_uniform_bandwidths() || config.max_power()[0] != config.max_power()[1] {
            return Err(Error::InvalidConfig("closed forms need equal budgets and bandwidths".into()));
        }
        Self::new(
            [gains.get(0, 0), gains.get(0, 1), gains.get(1, 0), gains.get(1, 1)],
            config.max_power()[0],
            config.noise_power(0),
        )
    }

    pub fn gains_array(&self) -> [f64; 4] {
        [self.g11, self.g12, self.g21, self.g22]
    }

    pub fn snr(&self) -> f64 {
        self.p_max / self.sigma2
    }

    /// Same gains and noise, budget rescaled to reach `snr`.
    pub fn at_snr(&self, snr: f64) -> Result<Self> {
        Self::new(self.gains_array(), snr * self.sigma2, self.sigma2)
    }

    pub fn psi(&self, x: f64) -> f64 {
        1.0 + self.snr() * x
    }

    /// Unit bandwidth per channel, so `N0 = sigma2`.
    pub fn config(&self) -> GameConfig {
        GameConfig::uniform(2, 2, self.p_max, self.sigma2, 1.0).expect("quad parameters are validated")
    }

    pub fn gains(&self) -> GainMatrix {
        GainMatrix::from_rows(vec![vec![self.g11, self.g12], vec![self.g21, self.g22]])
            .expect("quad gains are validated")
    }

    /// `((p11, P - p11), (P - p22, p22))`.
    pub fn profile(&self, p11: f64, p22: f64) -> PowerProfile {
        let p = self.p_max;
        let (p11, p22) = (p11.clamp(0.0, p), p22.clamp(0.0, p));
        PowerProfile::from_rows(vec![vec![p11, p - p11], vec![p - p22, p22]]).expect("clamped powers")
    }
}

fn margin(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b) / scale
    }
}

fn min_margin(tests: &[(f64, f64)]) -> f64 {
    tests.iter().map(|&(a, b)| margin(a, b)).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PaRegion {
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
    B8,
    DegenerateContinuum,
}

impl PaRegion {
    pub const FINITE: [PaRegion; 8] = [
        PaRegion::B1,
        PaRegion::B2,
        PaRegion::B3,
        PaRegion::B4,
        PaRegion::B5,
        PaRegion::B6,
        PaRegion::B7,
        PaRegion::B8,
    ];
}

impl fmt::Display for PaRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PaRegion::DegenerateContinuum => write!(f, "continuum"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// Line of equilibria `p11 = intercept + alpha * p22`, `p22` in `p22_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Continuum {
    pub alpha: f64,
    pub intercept: f64,
    pub p22_range: (f64, f64),
}

impl Continuum {
    pub fn p11(&self, p22: f64) -> f64 {
        self.intercept + self.alpha * p22
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.p22_range.0 + self.p22_range.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PaEquilibrium {
    Unique(PowerProfile),
    Continuum(Continuum),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaClassification {
    pub region: PaRegion,
    pub equilibrium: PaEquilibrium,
    /// Some inequality of the chosen region holds with less than the tolerance to spare.
    pub boundary: bool,
    /// Smallest margin of each of `B1..B8`.
    pub margins: [f64; 8],
}

impl PaClassification {
    /// The unique equilibrium, or the midpoint of the continuum.
    pub fn representative(&self, q: &ChannelQuad) -> PowerProfile {
        match &self.equilibrium {
            PaEquilibrium::Unique(p) => p.clone(),
            PaEquilibrium::Continuum(c) => {
                let p22 = c.midpoint();
                q.profile(c.p11(p22), p22)
            }
        }
    }
}

fn pa_tests(q: &ChannelQuad) -> [Vec<(f64, f64)>; 8] {
    let ChannelQuad { g11, g12, g21, g22, .. } = *q;
    let psi = |x| q.psi(x);
    let (d1, d2) = (g11 * g22, g21 * g12);
    [
        vec![(g11 * psi(g22), g12 * psi(g11)), (g22 * psi(g11), g21 * psi(g22))],
        vec![(g11, g12 * psi(g11 + g21)), (g21, g22 * psi(g11 + g21))],
        vec![(g12, g11 * psi(g12 + g22)), (g22, g21 * psi(g12 + g22))],
        vec![(g12 * psi(g21), g11 * psi(g12)), (g21 * psi(g12), g22 * psi(g21))],
        vec![(d1, d2), (g21 * psi(g22), g22 * psi(g11)), (g22 * psi(g11 + g21), g21)],
        vec![(d1, d2), (g11 * psi(g12 + g22), g12), (g12 * psi(g11), g11 * psi(g22))],
        vec![(d2, d1), (g11 * psi(g12), g12 * psi(g21)), (g12 * psi(g11 + g21), g11)],
        vec![(d2, d1), (g21 * psi(g12 + g22), g22), (g22 * psi(g21), g21 * psi(g12))],
    ]
}

fn pa_point(q: &ChannelQuad, region: PaRegion) -> (f64, f64) {
    let ChannelQuad {
        g11,
        g12,
        g21,
        g22,
        p_max: p,
        sigma2: n,
    } = *q;
    match region {
        PaRegion::B1 => (p, p),
        PaRegion::B2 => (p, 0.0),
        PaRegion::B3 => (0.0, p),
        PaRegion::B4 => (0.0, 0.0),
        PaRegion::B5 => (p, 0.5 * (p - n / g22 + (n + g11 * p) / g21)),
        PaRegion::B6 => (0.5 * (p - n / g11 + (n + p * g22) / g12), p),
        PaRegion::B7 => (0.5 * (p - (n + p * g21) / g11 + n / g12), 0.0),
        PaRegion::B8 => (0.0, 0.5 * (p - (n + g12 * p) / g22 + n / g21)),
        PaRegion::DegenerateContinuum => unreachable!("continuum has no single point"),
    }
}

/// The degenerate line, when `g11 g22 = g12 g21` and the ratio condition holds.
fn continuum(q: &ChannelQuad, tol: f64) -> Option<(Continuum, bool)> {
    let ChannelQuad { g11, g12, g21, g22, .. } = *q;
    let (d1, d2) = (g11 * g22, g12 * g21);
    if [g11, g12, g21, g22].contains(&0.0) || (d1 - d2).abs() > DEGENERACY_TOL * d1.max(d2) {
        return None;
    }
    // 1 / psi(g12 + g22) < g11 / g12 < psi(g11 + g21), in product form
    let lower = margin(g11 * q.psi(g12 + g22), g12);
    let upper = margin(g12 * q.psi(g11 + g21), g11);
    if lower <= 0.0 || upper <= 0.0 {
        return None;
    }
    let (p, n) = (q.p_max, q.sigma2);
    let alpha = g21 / g11;
    let intercept = 0.5 * (p * (1.0 - alpha) + n * (1.0 / g12 - 1.0 / g11));
    let lo = (-intercept / alpha).max(0.0);
    let hi = ((p - intercept) / alpha).min(p);
    if lo > hi {
        return None;
    }
    let line = Continuum {
        alpha,
        intercept,
        p22_range: (lo, hi),
    };
    Some((line, lower.min(upper) < tol))
}

/// Region of the power-allocation game and its equilibrium.
pub fn classify_pa_2x2(q: &ChannelQuad, boundary_tol: f64) -> Result<PaClassification> {
    let tests = pa_tests(q);
    let mut margins = [0.0; 8];
    for (m, t) in margins.iter_mut().zip(&tests) {
        *m = min_margin(t);
    }
    if let Some((line, boundary)) = continuum(q, boundary_tol) {
        return Ok(PaClassification {
            region: PaRegion::DegenerateContinuum,
            equilibrium: PaEquilibrium::Continuum(line),
            boundary,
            margins,
        });
    }
    let (best, &best_margin) = margins
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("eight regions");
    if best_margin < -boundary_tol {
        return Err(Error::Classification(format!(
            "no power-allocation region holds for {:?}; margins B1..B8 = {margins:?}",
            q.gains_array()
        )));
    }
    let region = PaRegion::FINITE[best];
    let (p11, p22) = pa_point(q, region);
    if !(p11.is_finite() && p22.is_finite()) {
        return Err(Error::Classification(format!("{region} formula is singular for {:?}", q.gains_array())));
    }
    Ok(PaClassification {
        region,
        equilibrium: PaEquilibrium::Unique(q.profile(p11, p22)),
        boundary: best_margin < boundary_tol,
        margins,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CsRegion {
    A1,
    A2,
    A3,
    A4,
}

impl CsRegion {
    pub const ALL: [CsRegion; 4] = [CsRegion::A1, CsRegion::A2, CsRegion::A3, CsRegion::A4];

    /// The equilibrium attached to the region, zero-based.
    pub fn profile(self) -> CsProfile {
        CsProfile(match self {
            CsRegion::A1 => vec![0, 1],
            CsRegion::A2 => vec![0, 0],
            CsRegion::A3 => vec![1, 1],
            CsRegion::A4 => vec![1, 0],
        })
    }
}

impl fmt::Display for CsRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsClassification {
    pub regions: Vec<CsRegion>,
    pub equilibria: Vec<CsProfile>,
    /// Both `A1` and `A4` hold.
    pub multiple: bool,
    /// Some region test lies within the tolerance of its boundary.
    pub boundary: bool,
    pub margins: [f64; 4],
}

fn cs_tests(q: &ChannelQuad) -> [[(f64, f64); 2]; 4] {
    let ChannelQuad { g11, g12, g21, g22, .. } = *q;
    let psi = |x| q.psi(x);
    [
        [(g11 * psi(g22), g12), (g22 * psi(g11), g21)],
        [(g11, g12 * psi(g21)), (g21, g22 * psi(g11))],
        [(g12, g11 * psi(g22)), (g22, g21 * psi(g12))],
        [(g12 * psi(g21), g11), (g21 * psi(g12), g22)],
    ]
}

/// Equilibria of the channel-selection game.
pub fn classify_cs_2x2(q: &ChannelQuad, boundary_tol: f64) -> Result<CsClassification> {
    let tests = cs_tests(q);
    let mut margins = [0.0; 4];
    for (m, t) in margins.iter_mut().zip(&tests) {
        *m = min_margin(t);
    }
    let regions: Vec<CsRegion> = CsRegion::ALL
        .into_iter()
        .zip(margins)
        .filter(|(_, m)| *m >= -boundary_tol)
        .map(|(r, _)| r)
        .collect();
    if regions.is_empty() {
        return Err(Error::Classification(format!(
            "no channel-selection region holds for {:?}; margins A1..A4 = {margins:?}",
            q.gains_array()
        )));
    }
    let boundary = tests
        .iter()
        .flatten()
        .any(|&(a, b)| margin(a, b).abs() < boundary_tol);
    Ok(CsClassification {
        multiple: regions.contains(&CsRegion::A1) && regions.contains(&CsRegion::A4),
        equilibria: regions.iter().map(|r| r.profile()).collect(),
        regions,
        boundary,
        margins,
    })
}

/// Each player on its stronger channel, the limit of both games as `SNR -> 0`.
pub fn low_snr_limit_ne(q: &ChannelQuad) -> Result<CsProfile> {
    let pick = |a: f64, b: f64, k: usize| {
        if a == b {
            Err(Error::Tie(format!("player {} has equal gains on both channels", k + 1)))
        } else {
            Ok(if a > b { 0 } else { 1 })
        }
    };
    Ok(CsProfile(vec![pick(q.g11, q.g12, 0)?, pick(q.g21, q.g22, 1)?]))
}

/// The two channel-selection equilibria that exist for every quad as `SNR -> inf`:
/// `(1,2)` and `(2,1)`, in that order.
pub fn high_snr_cs_ne(_q: &ChannelQuad) -> [CsProfile; 2] {
    [CsRegion::A1.profile(), CsRegion::A4.profile()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighSnrRegion {
    /// One of `B1, B4, B5, B6, B7, B8` (the limits of those regions).
    pub region: PaRegion,
    /// Limiting equilibrium for the quad's budget.
    pub profile: PowerProfile,
}

/// Limit region of the power-allocation game as `SNR -> inf`.
pub fn high_snr_pa_region(q: &ChannelQuad) -> Result<HighSnrRegion> {
    let ChannelQuad { g11, g12, g21, g22, p_max: p, .. } = *q;
    let d = g11 * g22 - g21 * g12;
    if d == 0.0 || g22 == g12 || g21 == g11 {
        return Err(Error::Tie(format!("{:?} lies on a limit-region boundary", q.gains_array())));
    }
    let (region, p11, p22) = if g22 > g12 && g21 < g11 {
        (PaRegion::B1, p, p)
    } else if g11 < g21 && g12 > g22 {
        (PaRegion::B4, 0.0, 0.0)
    } else if d > 0.0 && g21 > g11 {
        (PaRegion::B5, p, 0.5 * p * (1.0 + g11 / g21))
    } else if d > 0.0 {
        (PaRegion::B6, 0.5 * p * (1.0 + g22 / g12), p)
    } else if g11 > g21 {
        (PaRegion::B7, 0.5 * p * (1.0 - g21 / g11), 0.0)
    } else {
        (PaRegion::B8, 0.0, 0.5 * p * (1.0 - g12 / g22))
    };
    Ok(HighSnrRegion {
        region,
        profile: q.profile(p11, p22),
    })
}

/// NSE at a channel-selection equilibrium minus NSE at the power-allocation
/// equilibrium. `which = 1` compares against `(1,2)`, `which = 4` against `(2,1)`.
pub fn braess_gap(q: &ChannelQuad, which: u8, snr_override: Option<f64>) -> Result<f64> {
    let cs = match which {
        1 => CsRegion::A1.profile(),
        4 => CsRegion::A4.profile(),
        other => return Err(Error::InvalidConfig(format!("gap index must be 1 or 4, got {other}"))),
    };
    let q = match snr_override {
        Some(snr) => q.at_snr(snr)?,
        None => *q,
    };
    let (config, gains) = (q.config(), q.gains());
    let pa = classify_pa_2x2(&q, DEFAULT_BOUNDARY_TOL)?.representative(&q);
    let cs = crate::model::cs_to_power(&cs, &config)?;
    Ok(nse(&cs, &gains, &config)? - nse(&pa, &gains, &config)?)
}

/// Closed form of the gap against `(1,2)` for quads whose power-allocation
/// equilibrium lies in `B5`.
pub fn braess_gap_b5(q: &ChannelQuad) -> f64 {
    let ChannelQuad { g11, g21, g22, .. } = *q;
    let x = g21 / g22 * q.psi(g22) / q.psi(g11);
    0.5 * (2.0 - 2.0 * (1.0 + x).log2() - (1.0 + 1.0 / x).log2() + (g21 / g22 + q.psi(g21 - g11)).log2())
}

/// Region labels over a grid of `(g11/g12, g21/g22)` with `g12 = g22 = 1`.
/// Columns: `g11_over_g12,g21_over_g22,pa_region,cs_regions`.
pub fn write_region_map<W: Write>(out: W, ratios: &[f64], snr: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["g11_over_g12", "g21_over_g22", "pa_region", "cs_regions"])?;
    for &r1 in ratios {
        for &r2 in ratios {
            let q = ChannelQuad::with_snr([r1, 1.0, r2, 1.0], snr)?;
            let pa = classify_pa_2x2(&q, DEFAULT_BOUNDARY_TOL)
                .map(|c| c.region.to_string())
                .unwrap_or_else(|_| "none".into());
            let cs = classify_cs_2x2(&q, DEFAULT_BOUNDARY_TOL)
                .map(|c| c.regions.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("+"))
                .unwrap_or_else(|_| "none".into());
            w.write_record([r1.to_string(), r2.to_string(), pa, cs])?;
        }
    }
    w.flush()?;
    Ok(())
}
