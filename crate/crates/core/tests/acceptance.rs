//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use pmac::cs::{build_cs_graph, enumerate_cs_ne, ne_upper_bound, EnumerateOptions, DEFAULT_ENUMERATION_CAP};
use pmac::harness::{
    run_experiment, run_fractions, run_ne_count_pmf, run_nse_vs_snr, sample_gains, trial_rng, ExperimentKind,
    ExperimentSpec, FRACTION_BANDWIDTHS,
};
use pmac::asymptotics::{solve_fractions, LargeSystemParams};
use pmac::model::{cs_to_power, nse, potential, utility};
use pmac::pa::{solve_pa_ne, verify_pa_ne, PaInit, WaterfillParams};
use pmac::sic::{sic_nse, sic_user_rates, DecodingOrder};
use pmac::two_by_two::{
    braess_gap, classify_cs_2x2, classify_pa_2x2, high_snr_cs_ne, high_snr_pa_region, low_snr_limit_ne,
    ChannelQuad, PaEquilibrium, PaRegion, DEFAULT_BOUNDARY_TOL,
};
use pmac::{CsProfile, GainMatrix, GameConfig, PowerProfile};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Random system with `K <= 4`, `S <= 3`, heterogeneous budgets and bandwidths.
fn small_instance(rng: &mut ChaCha8Rng) -> (GameConfig, GainMatrix) {
    let k = rng.random_range(1..=4);
    let s = rng.random_range(1..=3);
    let snr = db(rng.random_range(-20.0..40.0));
    let config = GameConfig::new(
        (0..k).map(|_| snr * rng.random_range(0.5..2.0)).collect(),
        rng.random_range(0.2..2.0),
        (0..s).map(|_| rng.random_range(0.5..2.0)).collect(),
    )
    .unwrap();
    (config, sample_gains(k, s, rng))
}

fn random_feasible(config: &GameConfig, rng: &mut ChaCha8Rng) -> PowerProfile {
    let rows = config
        .max_power()
        .iter()
        .map(|p| {
            let w: Vec<f64> = (0..config.num_channels()).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum::<f64>() / rng.random_range(0.3..1.0);
            w.iter().map(|v| v / total * p).collect()
        })
        .collect();
    PowerProfile::from_rows(rows).unwrap()
}

fn quad(rng: &mut ChaCha8Rng, snr: f64) -> ChannelQuad {
    let g = sample_gains(2, 2, rng);
    ChannelQuad::with_snr([g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1)], snr).unwrap()
}

fn potential_identity() -> Outcome {
    let worst = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(101, i);
            let (config, gains) = small_instance(&mut rng);
            let mut worst: f64 = 0.0;
            for d in 0..10 {
                let base = if d % 2 == 0 {
                    random_feasible(&config, &mut rng)
                } else {
                    let c = (0..config.num_players()).map(|_| rng.random_range(0..config.num_channels())).collect();
                    cs_to_power(&CsProfile(c), &config).unwrap()
                };
                let k = rng.random_range(0..config.num_players());
                let mut moved = base.clone();
                if d % 2 == 0 {
                    let other = random_feasible(&config, &mut rng);
                    moved.set_row(k, other.row(k));
                } else {
                    let mut row = vec![0.0; config.num_channels()];
                    row[rng.random_range(0..config.num_channels())] = config.max_power()[k];
                    moved.set_row(k, &row);
                }
                let du = utility(&base, &gains, &config, k).unwrap() - utility(&moved, &gains, &config, k).unwrap();
                let dphi = potential(&base, &gains, &config).unwrap() - potential(&moved, &gains, &config).unwrap();
                worst = worst.max((du - dphi).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= 1e-10, format!("1e4 instances x 10 deviations, max |du - dphi| = {worst:.2e}"))
}

/// Instances shared by criteria 2 and 3.
fn graph_instances() -> Vec<(GameConfig, GainMatrix)> {
    (0..1000u64)
        .map(|i| small_instance(&mut trial_rng(202, i)))
        .collect()
}

fn sink_equivalence(instances: &[(GameConfig, GainMatrix)]) -> Outcome {
    let mismatches = instances
        .par_iter()
        .filter(|(config, gains)| {
            let report = enumerate_cs_ne(gains, config, &EnumerateOptions::default()).unwrap();
            let graph = build_cs_graph(gains, config, DEFAULT_ENUMERATION_CAP).unwrap();
            let enumerated: Vec<u64> = report.equilibria.iter().map(|e| e.index).collect();
            graph.sinks() != enumerated
        })
        .count();
    outcome(mismatches == 0, format!("{} instances, {mismatches} sink/deviation mismatches", instances.len()))
}

fn count_bound(instances: &[(GameConfig, GainMatrix)]) -> Outcome {
    let violations = instances
        .par_iter()
        .filter(|(config, gains)| {
            let n = enumerate_cs_ne(gains, config, &EnumerateOptions::default()).unwrap().count as u128;
            !(1..=ne_upper_bound(config.num_players(), config.num_channels()).l_max).contains(&n)
        })
        .count();
    let observed_max = |k: usize, s: usize| {
        let spec = ExperimentSpec {
            num_players: Some(k),
            num_channels: Some(s),
            snr_grid_db: vec![0.0, 5.0, 10.0, 20.0, 30.0],
            trials: 10_000,
            seed: 303,
            ..ExperimentSpec::new(ExperimentKind::NeCountPmf)
        };
        run_ne_count_pmf(&spec)
            .unwrap()
            .iter()
            .filter(|r| r.occurrences > 0)
            .map(|r| r.ne_count)
            .max()
            .unwrap()
    };
    let (m32, m33) = (observed_max(3, 2), observed_max(3, 3));
    let (b32, b33) = (ne_upper_bound(3, 2).l_max, ne_upper_bound(3, 3).l_max);
    outcome(
        violations == 0 && m32 == 3 && m33 == 6 && b32 == 4 && b33 == 7,
        format!(
            "{violations} bound violations; observed max {m32} (bound {b32}) for K=3,S=2 and {m33} (bound {b33}) for K=3,S=3 over 5x1e4 draws"
        ),
    )
}

fn two_by_two_cross_validation() -> Outcome {
    let results: Vec<Option<bool>> = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let q = quad(&mut trial_rng(404, i), db(10.0));
            let pa = classify_pa_2x2(&q, DEFAULT_BOUNDARY_TOL).unwrap();
            let cs = classify_cs_2x2(&q, DEFAULT_BOUNDARY_TOL).unwrap();
            if pa.boundary || cs.boundary || pa.region == PaRegion::DegenerateContinuum {
                return None;
            }
            let PaEquilibrium::Unique(analytic) = &pa.equilibrium else { unreachable!() };
            let solved = solve_pa_ne(&q.gains(), &q.config(), &WaterfillParams::default(), PaInit::Uniform).unwrap();
            let pa_ok = solved.converged && solved.profile.max_abs_diff(analytic) <= 1e-6;
            let mut a = cs.equilibria.clone();
            a.sort();
            let report = enumerate_cs_ne(&q.gains(), &q.config(), &EnumerateOptions::default()).unwrap();
            let mut e: Vec<CsProfile> = report.equilibria.iter().map(|x| x.profile()).collect();
            e.sort();
            Some(pa_ok && a == e)
        })
        .collect();
    let excluded = results.iter().filter(|r| r.is_none()).count();
    let counted = results.len() - excluded;
    let agree = results.iter().filter(|r| **r == Some(true)).count();
    let rate = agree as f64 / counted as f64;
    outcome(
        rate >= 0.999,
        format!("{agree}/{counted} agree ({:.3}%), {excluded} boundary draws excluded", 100.0 * rate),
    )
}

fn degenerate_continuum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    let mut lines = 0;
    let mut attempts = 0;
    while lines < 100 {
        attempts += 1;
        let (g11, g12) = (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0));
        let alpha = rng.random_range(0.3..3.0);
        let q = ChannelQuad::with_snr([g11, g12, alpha * g11, alpha * g12], db(rng.random_range(-5.0..15.0))).unwrap();
        let c = classify_pa_2x2(&q, DEFAULT_BOUNDARY_TOL).unwrap();
        let PaEquilibrium::Continuum(line) = c.equilibrium else { continue };
        let (lo, hi) = line.p22_range;
        if hi - lo < 1e-6 * q.p_max {
            continue;
        }
        lines += 1;
        for _ in 0..10 {
            let p22 = lo + rng.random_range(0.01..0.99) * (hi - lo);
            let profile = q.profile(line.p11(p22), p22);
            let v = verify_pa_ne(&profile, &q.gains(), &q.config(), 1e-6).unwrap();
            worst = worst.max(v.residual);
        }
    }
    outcome(
        worst <= 1e-6,
        format!("{lines} degenerate quads ({attempts} crafted), 10 points each, max residual {worst:.2e}"),
    )
}

fn low_snr_limit() -> Outcome {
    let snr = db(-40.0);
    let hits: Vec<(bool, bool)> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let q = quad(&mut trial_rng(606, i), snr);
            let limit = low_snr_limit_ne(&q).unwrap();
            let target = cs_to_power(&limit, &q.config()).unwrap();
            let solved = solve_pa_ne(&q.gains(), &q.config(), &WaterfillParams::default(), PaInit::Uniform).unwrap();
            let pa = solved.profile.max_abs_diff(&target) <= 1e-6 * q.p_max;
            let report = enumerate_cs_ne(&q.gains(), &q.config(), &EnumerateOptions::default()).unwrap();
            let cs = report.count == 1 && report.equilibria[0].profile() == limit;
            (pa, cs)
        })
        .collect();
    let pa = hits.iter().filter(|h| h.0).count();
    let cs = hits.iter().filter(|h| h.1).count();
    outcome(
        pa >= 990 && cs >= 990,
        format!("argmax profile matches PA on {pa}/1000 and CS on {cs}/1000 at -40 dB"),
    )
}

fn high_snr_braess() -> Outcome {
    let snr = db(40.0);
    let draws: Vec<(bool, bool, Option<bool>)> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let q = quad(&mut trial_rng(707, i), snr);
            let (config, gains) = (q.config(), q.gains());
            let report = enumerate_cs_ne(&gains, &config, &EnumerateOptions::default()).unwrap();
            let pair = high_snr_cs_ne(&q);
            let both_ne = pair.iter().all(|p| report.equilibria.iter().any(|e| e.profile() == *p));
            let solved = solve_pa_ne(&gains, &config, &WaterfillParams::default(), PaInit::Uniform).unwrap();
            let nse_pa = nse(&solved.profile, &gains, &config).unwrap();
            let best_cs = pair
                .iter()
                .map(|p| nse(&cs_to_power(p, &config).unwrap(), &gains, &config).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let braess = best_cs - nse_pa >= -1e-6;
            let increasing = match high_snr_pa_region(&q) {
                Ok(r) if r.region == PaRegion::B5 => {
                    let gaps: Vec<f64> = [20.0, 30.0, 40.0]
                        .iter()
                        .map(|d| braess_gap(&q, 1, Some(db(*d))).unwrap())
                        .collect();
                    Some(gaps[0] < gaps[1] && gaps[1] < gaps[2])
                }
                _ => None,
            };
            (both_ne, braess, increasing)
        })
        .collect();
    let both_ne = draws.iter().filter(|d| d.0).count();
    let braess = draws.iter().filter(|d| d.1).count();
    let joint = draws.iter().filter(|d| d.0 && d.1).count();
    let b5: Vec<bool> = draws.iter().filter_map(|d| d.2).collect();
    let increasing = b5.iter().filter(|x| **x).count();
    outcome(
        joint >= 990 && increasing == b5.len() && !b5.is_empty(),
        format!(
            "both CS profiles NE on {both_ne}/1000, Braess ordering on {braess}/1000 (jointly {joint}); \
             gap increasing on {increasing}/{} B'5 quads",
            b5.len()
        ),
    )
}

fn waterfill_fixed_point() -> Outcome {
    let stats: Vec<(f64, f64, bool)> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(808, i);
            let (config, gains) = if i % 4 == 0 {
                let s = rng.random_range(2..=8);
                let k = rng.random_range(2..=10);
                let config = GameConfig::uniform(k, s, db(rng.random_range(-10.0..40.0)), 1.0, 1.0).unwrap();
                (config, sample_gains(k, s, &mut rng))
            } else {
                small_instance(&mut rng)
            };
            let sol = solve_pa_ne(&gains, &config, &WaterfillParams::default(), PaInit::Uniform).unwrap();
            let residual = verify_pa_ne(&sol.profile, &gains, &config, 1e-8).unwrap().residual;
            let saturation = (0..config.num_players())
                .map(|k| (sol.profile.row(k).iter().sum::<f64>() - config.max_power()[k]).abs())
                .fold(0.0, f64::max);
            (residual, saturation, sol.converged)
        })
        .collect();
    let residual = stats.iter().map(|s| s.0).fold(0.0, f64::max);
    let saturation = stats.iter().map(|s| s.1).fold(0.0, f64::max);
    let converged = stats.iter().filter(|s| s.2).count();
    outcome(
        residual <= 1e-8 && saturation <= 1e-8 && converged == stats.len(),
        format!("{converged}/1000 converged, max BR residual {residual:.2e}, max budget gap {saturation:.2e}"),
    )
}

fn sic_identities() -> Outcome {
    let (identity, telescoping) = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(909, i);
            let (config, gains) = small_instance(&mut rng);
            let p = random_feasible(&config, &mut rng);
            let noise: f64 = (0..config.num_channels())
                .map(|s| config.bandwidth_fraction(s) * config.noise_power(s).log2())
                .sum();
            let total = sic_nse(&p, &gains, &config).unwrap();
            let phi = potential(&p, &gains, &config).unwrap();
            let mut order: Vec<usize> = (0..config.num_players()).collect();
            order.shuffle(&mut rng);
            let rates = sic_user_rates(&p, &gains, &config, &DecodingOrder::new(order).unwrap()).unwrap();
            ((total - (phi - noise)).abs(), (rates.rates.iter().sum::<f64>() - total).abs())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    outcome(
        identity <= 1e-10 && telescoping <= 1e-10,
        format!("max identity error {identity:.2e}, max telescoping error {telescoping:.2e}"),
    )
}

fn large_system_fractions() -> Outcome {
    let spec = ExperimentSpec {
        num_players: Some(60),
        snr_grid_db: vec![10.0],
        trials: 200,
        seed: 1010,
        ..ExperimentSpec::new(ExperimentKind::Fractions)
    };
    let rows = run_fractions(&spec).unwrap();
    let empirical = rows
        .iter()
        .map(|r| (r.x_empirical_mean - r.b_s).abs())
        .fold(0.0, f64::max);
    let params = LargeSystemParams::rayleigh(1.0 / 60.0, FRACTION_BANDWIDTHS.to_vec(), db(10.0), 1.0).unwrap();
    let x = solve_fractions(&params, 1e-12).unwrap();
    let formula = x
        .x
        .iter()
        .zip(FRACTION_BANDWIDTHS)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let means: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.x_empirical_mean)).collect();
    outcome(
        empirical <= 0.05 && formula <= 1e-10,
        format!(
            "K=60, S=6, 200 draws: empirical means [{}], max |mean - b| {empirical:.3}; formula error {formula:.1e}",
            means.join(", ")
        ),
    )
}

fn figure_shape() -> Outcome {
    let spec = ExperimentSpec {
        num_players: Some(10),
        loads: vec![0.5, 1.0, 1.5],
        snr_grid_db: vec![-20.0, 30.0],
        trials: 500,
        seed: 1111,
        ..ExperimentSpec::new(ExperimentKind::NseVsSnr)
    };
    let rows = run_nse_vs_snr(&spec).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for r in &rows {
        let diff = r.nse_cs_mean - r.nse_pa_mean;
        let ok = r.failures == 0
            && if r.snr_db < 0.0 {
                diff.abs() <= 2.0 * r.nse_pa_se.max(r.nse_cs_se)
            } else if r.load >= 1.0 {
                diff >= 0.0
            } else {
                diff <= 0.0
            };
        pass &= ok;
        notes.push(format!("eta={} {}dB cs-pa={diff:+.3}{}", r.load, r.snr_db, if ok { "" } else { " (x)" }));
    }
    outcome(pass, notes.join("; "))
}

fn determinism() -> Outcome {
    let specs = [
        ExperimentSpec {
            num_players: Some(6),
            loads: vec![1.0, 2.0],
            snr_grid_db: vec![0.0, 20.0],
            trials: 40,
            seed: 12,
            ..ExperimentSpec::new(ExperimentKind::NseVsSnr)
        },
        ExperimentSpec {
            num_players: Some(3),
            num_channels: Some(3),
            snr_grid_db: vec![0.0],
            trials: 300,
            seed: 12,
            ..ExperimentSpec::new(ExperimentKind::NeCountPmf)
        },
        ExperimentSpec {
            num_players: Some(30),
            snr_grid_db: vec![10.0],
            trials: 30,
            seed: 12,
            ..ExperimentSpec::new(ExperimentKind::Fractions)
        },
    ];
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let identical = specs.iter().all(|spec| {
        let a = run_experiment(spec).unwrap().to_csv_string().unwrap();
        let b = run_experiment(spec).unwrap().to_csv_string().unwrap();
        let c = single.install(|| run_experiment(spec).unwrap().to_csv_string().unwrap());
        a == b && a == c
    });
    outcome(identical, "three experiment kinds, repeated and single-threaded runs compared byte for byte".into())
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let graphs = graph_instances();
    let criteria: Vec<(&str, Check)> = vec![
        ("exact potential identity", Box::new(potential_identity)),
        ("sink / deviation equivalence", Box::new(|| sink_equivalence(&graphs))),
        ("equilibrium count bound", Box::new(|| count_bound(&graphs))),
        ("2x2 closed forms vs solvers", Box::new(two_by_two_cross_validation)),
        ("degenerate continuum", Box::new(degenerate_continuum)),
        ("low-SNR limit", Box::new(low_snr_limit)),
        ("high-SNR Braess paradox", Box::new(high_snr_braess)),
        ("water-filling fixed point", Box::new(waterfill_fixed_point)),
        ("SIC identities", Box::new(sic_identities)),
        ("large-system fractions", Box::new(large_system_fractions)),
        ("NSE figure orderings", Box::new(figure_shape)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
