//! Weighted water-filling on a single budget:
//! `x_s = [w_s * level - f_s]^+` with `sum_s x_s = budget`.
//!
//! Channels with an infinite floor are never filled.

use crate::error::{Error, Result};

pub(crate) struct Fill {
    pub amounts: Vec<f64>,
}

fn filled(weights: &[f64], floors: &[f64], level: f64) -> f64 {
    weights
        .iter()
        .zip(floors)
        .map(|(w, f)| (w * level - f).max(0.0))
        .sum()
}

pub(crate) fn water_fill(
    weights: &[f64],
    floors: &[f64],
    budget: f64,
    tolerance: f64,
    max_iters: usize,
) -> Result<Fill> {
    debug_assert_eq!(weights.len(), floors.len());
    let open: Vec<usize> = (0..floors.len()).filter(|&s| floors[s].is_finite()).collect();
    if open.is_empty() || budget <= 0.0 {
        return Ok(Fill {
            amounts: vec![0.0; floors.len()],
        });
    }

    let thresholds = open.iter().map(|&s| floors[s] / weights[s]);
    let mut lo = thresholds.clone().fold(f64::INFINITY, f64::min);
    let min_weight = open.iter().map(|&s| weights[s]).fold(f64::INFINITY, f64::min);
    let mut hi = thresholds.fold(f64::NEG_INFINITY, f64::max) + budget / min_weight;

    let target = tolerance * budget.max(1.0);
    let mut iterations = 0;
    let mut level = 0.5 * (lo + hi);
    loop {
        let excess = filled(weights, floors, level) - budget;
        if excess.abs() <= target {
            break;
        }
        if excess > 0.0 {
            hi = level;
        } else {
            lo = level;
        }
        let next = 0.5 * (lo + hi);
        if next == lo || next == hi {
            break;
        }
        level = next;
        iterations += 1;
        if iterations >= max_iters {
            return Err(Error::Bisection { iterations, lo, hi });
        }
    }

    // Snap to the exact level for the active set found by bisection.
    let active: Vec<usize> = open
        .iter()
        .copied()
        .filter(|&s| weights[s] * level > floors[s])
        .collect();
    let exact = (budget + active.iter().map(|&s| floors[s]).sum::<f64>())
        / active.iter().map(|&s| weights[s]).sum::<f64>();
    let consistent = open
        .iter()
        .all(|&s| (weights[s] * exact > floors[s]) == active.contains(&s));
    if consistent && exact.is_finite() {
        level = exact;
    }

    let amounts = weights
        .iter()
        .zip(floors)
        .map(|(w, f)| if f.is_finite() { (w * level - f).max(0.0) } else { 0.0 })
        .collect();
    Ok(Fill { amounts })
}
