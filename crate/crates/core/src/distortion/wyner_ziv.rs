//! Direct search for the Wyner-Ziv rate `min I(X; U | Y)` over test
//! channels `p(u | x)` with `|U| <= 3`, each decoder `z(u, y)` chosen
//! optimally. Independent of the envelope machinery; a heuristic upper
//! bound on the true minimum.

use rayon::prelude::*;

use super::model::DistortionModel;
use crate::error::{Error, Result};
use crate::model::neg_x_log2_x;

const RESOLUTION: usize = 64;
const REFINE_ROUNDS: usize = 200;
const BUDGET_TOL: f64 = 1e-12;

type TestChannel = [[f64; 3]; 2];

struct Source<'a> {
    px: [f64; 2],
    channel: [[f64; 2]; 2],
    model: &'a DistortionModel,
    u_card: usize,
}

impl Source<'_> {
    /// `(I(X; U | Y), least expected distortion)` for test channel `w[x][u]`.
    fn evaluate(&self, w: &TestChannel) -> (f64, f64) {
        let mut h_u_given_y = 0.0;
        let mut distortion = 0.0;
        for y in 0..2 {
            let py: f64 = (0..2).map(|x| self.px[x] * self.channel[x][y]).sum();
            if py <= 0.0 {
                continue;
            }
            let mut h_uy = 0.0;
            for u in 0..self.u_card {
                let mass = |x: usize| self.px[x] * self.channel[x][y] * w[x][u];
                h_uy += neg_x_log2_x(mass(0) + mass(1));
                distortion += self.model.best_guess(mass, y);
            }
            h_u_given_y += h_uy - neg_x_log2_x(py);
        }
        let h_u_given_x: f64 = (0..2)
            .map(|x| self.px[x] * (0..self.u_card).map(|u| neg_x_log2_x(w[x][u])).sum::<f64>())
            .sum();
        ((h_u_given_y - h_u_given_x).max(0.0), distortion)
    }

    fn simplex_grid(&self) -> Vec<[f64; 3]> {
        let r = RESOLUTION as f64;
        match self.u_card {
            2 => (0..=RESOLUTION).map(|a| [a as f64 / r, 1.0 - a as f64 / r, 0.0]).collect(),
            _ => (0..=RESOLUTION)
                .flat_map(|a| (0..=RESOLUTION - a).map(move |b| [a as f64 / r, b as f64 / r, (RESOLUTION - a - b) as f64 / r]))
                .collect(),
        }
    }

    /// Coordinate descent: move mass between two letters of one row, keep
    /// moves that stay within budget and lower the rate, halve the step
    /// when a round makes no progress.
    fn refine(&self, mut w: TestChannel, budget: f64) -> f64 {
        let (mut best, _) = self.evaluate(&w);
        let mut step = 1.0 / RESOLUTION as f64;
        for _ in 0..REFINE_ROUNDS {
            let mut improved = false;
            for x in 0..2 {
                for from in 0..self.u_card {
                    for to in 0..self.u_card {
                        if from == to {
                            continue;
                        }
                        let delta = step.min(w[x][from]);
                        if delta <= 0.0 {
                            continue;
                        }
                        let mut trial = w;
                        trial[x][from] -= delta;
                        trial[x][to] += delta;
                        let (rate, dist) = self.evaluate(&trial);
                        if dist <= budget + BUDGET_TOL && rate < best {
                            best = rate;
                            w = trial;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        best
    }
}

fn check_inputs(p_x: f64, channel: &[[f64; 2]; 2], u_card: usize) -> Result<()> {
    if !(2..=3).contains(&u_card) {
        return Err(Error::InvalidConfig(format!("auxiliary alphabet size must be 2 or 3, got {u_card}")));
    }
    if !(0.0..=1.0).contains(&p_x) {
        return Err(Error::domain(format!("p_x = {p_x} outside [0, 1]")));
    }
    for row in channel {
        if row.iter().any(|&w| !(w >= 0.0)) || (row[0] + row[1] - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("channel row {row:?} is not a pmf")));
        }
    }
    Ok(())
}

/// Searched Wyner-Ziv rate at each budget in `budgets`; `+inf` where no
/// searched channel meets the budget.
pub fn brute_force_wz_curve(
    p_x: f64,
    channel: [[f64; 2]; 2],
    model: &DistortionModel,
    budgets: &[f64],
    u_card: usize,
) -> Result<Vec<f64>> {
    check_inputs(p_x, &channel, u_card)?;
    let source = Source {
        px: [1.0 - p_x, p_x],
        channel,
        model,
        u_card,
    };
    let rows = source.simplex_grid();

    // Each grid channel lands in the bucket of the smallest budget it
    // meets; a prefix minimum over sorted budgets then gives the best
    // channel per budget.
    let mut order: Vec<usize> = (0..budgets.len()).collect();
    order.sort_by(|&a, &b| budgets[a].total_cmp(&budgets[b]));
    let sorted: Vec<f64> = order.iter().map(|&k| budgets[k]).collect();
    type Slot = Option<(f64, TestChannel)>;
    let keep_lower = |a: Slot, b: Slot| match (a, b) {
        (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
        (x, y) => x.or(y),
    };
    let buckets: Vec<Slot> = rows
        .par_iter()
        .map(|r0| {
            let mut local: Vec<Slot> = vec![None; sorted.len()];
            for r1 in &rows {
                let w = [*r0, *r1];
                let (rate, dist) = source.evaluate(&w);
                let k = sorted.partition_point(|&b| dist > b + BUDGET_TOL);
                if k < local.len() && local[k].is_none_or(|(r, _)| rate < r) {
                    local[k] = Some((rate, w));
                }
            }
            local
        })
        .reduce(|| vec![None; sorted.len()], |a, b| a.into_iter().zip(b).map(|(x, y)| keep_lower(x, y)).collect());
    let mut best: Vec<Slot> = vec![None; budgets.len()];
    let mut running: Slot = None;
    for (slot, &k) in buckets.into_iter().zip(&order) {
        running = keep_lower(running, slot);
        best[k] = running;
    }

    Ok(best
        .into_par_iter()
        .zip(budgets.par_iter())
        .map(|(slot, &budget)| match slot {
            Some((_, w)) => source.refine(w, budget),
            None => f64::INFINITY,
        })
        .collect())
}

/// Searched Wyner-Ziv rate at one budget.
pub fn brute_force_wz(
    p_x: f64,
    channel: [[f64; 2]; 2],
    model: &DistortionModel,
    budget: f64,
    u_card: usize,
) -> Result<f64> {
    Ok(brute_force_wz_curve(p_x, channel, model, &[budget], u_card)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::h2;
    use approx::assert_abs_diff_eq;

    #[test]
    fn useless_side_information_is_classical() {
        let m = DistortionModel::hamming_on_x();
        let r = brute_force_wz(0.3, [[0.5, 0.5], [0.5, 0.5]], &m, 0.1, 2).unwrap();
        assert_abs_diff_eq!(r, h2(0.3) - h2(0.1), epsilon = 2e-3);
    }

    #[test]
    fn trivial_cases() {
        let m = DistortionModel::hamming_on_x();
        assert_eq!(brute_force_wz(0.3, [[0.5, 0.5], [0.5, 0.5]], &m, 0.5, 2).unwrap(), 0.0);
        for d in [0.0, 0.1, 0.4] {
            assert_abs_diff_eq!(brute_force_wz(0.3, [[1.0, 0.0], [0.0, 1.0]], &m, d, 3).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn input_checks() {
        let m = DistortionModel::hamming_on_x();
        assert!(brute_force_wz(0.3, [[0.5, 0.5], [0.5, 0.5]], &m, 0.1, 4).is_err());
        assert!(brute_force_wz(1.3, [[0.5, 0.5], [0.5, 0.5]], &m, 0.1, 2).is_err());
        assert!(brute_force_wz(0.3, [[0.5, 0.6], [0.5, 0.5]], &m, 0.1, 2).is_err());
    }

    #[test]
    fn infeasible_budget_is_infinite() {
        // every reconstruction costs at least 0.5
        let m = DistortionModel::new(vec![[[0.5, 0.5], [0.5, 0.5]]]).unwrap();
        assert_eq!(brute_force_wz(0.3, [[0.5, 0.5], [0.5, 0.5]], &m, 0.1, 2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn curve_is_non_increasing() {
        let m = DistortionModel::hamming_on_x();
        let ds: Vec<f64> = (0..=10).map(|k| k as f64 * 0.03).collect();
        let c = brute_force_wz_curve(0.5, [[0.75, 0.25], [0.25, 0.75]], &m, &ds, 3).unwrap();
        for w in c.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        assert_abs_diff_eq!(c[0], h2(0.25), epsilon = 1e-9);
        assert_eq!(*c.last().unwrap(), 0.0);
    }
}
