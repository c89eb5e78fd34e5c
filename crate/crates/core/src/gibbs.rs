//! Payload-limited sender: the change distribution with the least expected
//! cost for a given entropy, `pi(d) ~ exp(-lambda * rho(d))`, with `lambda`
//! found by bracketing and bisection. Entropies are in nats.

use rayon::prelude::*;
use serde::Serialize;

use crate::distortion::CostTable;
use crate::error::GibbsError;
use crate::quant::Channel;

/// Bisection iterations after the bracket is found.
pub const MAX_BISECTIONS: usize = 200;
/// The bracket stops growing past this and the solver settles for the
/// entropy floor set by tied minimum costs.
const LAMBDA_CEILING: f64 = 1e15;
const CHUNK: usize = 1024;

/// Total payload and its split over the three coordinate channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayloadPlan {
    /// Bits per vertex over all channels.
    pub alpha: f64,
    pub per_channel: [f64; 3],
    /// Message bits per channel and layer, filled in by the embedder.
    pub message_lengths: Vec<Vec<usize>>,
}

/// Uniform split `alpha / 3` per channel.
pub fn split_payload(alpha: f64) -> PayloadPlan {
    split_payload_with(alpha, [1.0, 1.0, 1.0])
}

/// Split proportionally to `weights`; the last channel takes the remainder.
pub fn split_payload_with(alpha: f64, weights: [f64; 3]) -> PayloadPlan {
    let total: f64 = weights.iter().sum();
    let x = alpha * weights[0] / total;
    let y = alpha * weights[1] / total;
    let z = alpha - x - y;
    PayloadPlan {
        alpha,
        per_channel: [x, y, z],
        message_lengths: Vec::new(),
    }
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Gibbs probabilities of one cost row into `out`; returns the row entropy.
#[inline]
pub fn gibbs_row(costs: &[f64], lambda: f64, out: &mut [f64]) -> f64 {
    let m = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut z = 0.0;
    for (o, &c) in out.iter_mut().zip(costs) {
        *o = (-lambda * (c - m)).exp();
        z += *o;
    }
    let mut mean = 0.0;
    for (o, &c) in out.iter_mut().zip(costs) {
        *o /= z;
        if *o > 0.0 {
            mean += *o * (c - m);
        }
    }
    (z.ln() + lambda * mean).max(0.0)
}

/// Gibbs distribution of one channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelDistribution {
    pub channel: Channel,
    pub lambda: f64,
    /// Achieved total entropy, nats.
    pub entropy: f64,
    /// Requested total entropy, nats.
    pub target: f64,
    /// Number of changes per vertex.
    pub width: usize,
    /// `probs[i * width + d]`.
    #[serde(skip)]
    pub probs: Vec<f64>,
}

impl ChannelDistribution {
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.width..(i + 1) * self.width]
    }

    pub fn vertex_count(&self) -> usize {
        self.probs.len().checked_div(self.width).unwrap_or(0)
    }
}

/// Distributions of all three channels over the same change steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeDistribution {
    pub steps: Vec<i64>,
    pub channels: Vec<ChannelDistribution>,
}

fn rows(table: &CostTable, channel: Channel) -> impl IndexedParallelIterator<Item = &[f64]> + '_ {
    (0..table.vertex_count).into_par_iter().map(move |i| table.row(i, channel))
}

/// Entropy of the channel at `lambda`, summed in fixed-size chunks so the
/// result does not depend on the thread count.
pub fn channel_entropy(table: &CostTable, channel: Channel, lambda: f64) -> f64 {
    let w = table.steps.len();
    let per_row: Vec<f64> = rows(table, channel)
        .map_init(
            || vec![0.0; w],
            |buf, r| gibbs_row(r, lambda, buf),
        )
        .collect();
    per_row
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// The channel's distribution at a given `lambda`.
pub fn distribution_at(table: &CostTable, channel: Channel, lambda: f64, target: f64) -> ChannelDistribution {
    let w = table.steps.len();
    let mut probs = vec![0.0; table.vertex_count * w];
    let per_row: Vec<f64> = probs
        .par_chunks_mut(w.max(1))
        .zip(rows(table, channel))
        .map(|(out, r)| gibbs_row(r, lambda, out))
        .collect();
    let entropy = per_row
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    ChannelDistribution {
        channel,
        lambda,
        entropy,
        target,
        width: w,
        probs,
    }
}

/// Largest entropy the channel can carry: uniform over every change.
pub fn max_entropy(table: &CostTable) -> f64 {
    table.vertex_count as f64 * (table.steps.len() as f64).ln()
}

/// Find `lambda` with total entropy equal to `target` nats.
///
/// When every row has constant costs the entropy does not depend on
/// `lambda` and the uniform distribution (`lambda = 0`) is returned.
pub fn solve_lambda(table: &CostTable, channel: Channel, target: f64) -> Result<ChannelDistribution, GibbsError> {
    if table.vertex_count == 0 || table.steps.is_empty() {
        return Err(GibbsError::Empty);
    }
    if !(target > 0.0) {
        return Err(GibbsError::Degenerate(target));
    }
    let max = max_entropy(table);
    if target >= max {
        return Err(GibbsError::Capacity { target, max });
    }
    let flat = (0..table.vertex_count).all(|i| {
        let r = table.row(i, channel);
        r.iter().all(|&c| c == r[0])
    });
    if flat {
        return Ok(distribution_at(table, channel, 0.0, target));
    }
    let h = |l: f64| channel_entropy(table, channel, l);
    let (mut lo, mut hi) = (0.0, 1.0);
    while h(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > LAMBDA_CEILING {
            return Ok(distribution_at(table, channel, hi, target));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = h(mid);
        if e == target {
            lo = mid;
            hi = mid;
            break;
        }
        if e > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (h(lo), h(hi));
    let lambda = if (a - target).abs() <= (b - target).abs() { lo } else { hi };
    Ok(distribution_at(table, channel, lambda, target))
}

/// `E[D] = sum rho * pi` over the channel.
pub fn channel_expected_distortion(table: &CostTable, dist: &ChannelDistribution) -> f64 {
    let per_row: Vec<f64> = (0..table.vertex_count)
        .into_par_iter()
        .map(|i| {
            table
                .row(i, dist.channel)
                .iter()
                .zip(dist.row(i))
                .map(|(c, p)| c * p)
                .sum::<f64>()
        })
        .collect();
    per_row.iter().sum()
}

/// Expected distortion over every channel in `dist`.
pub fn expected_distortion(table: &CostTable, dist: &ChangeDistribution) -> f64 {
    dist.channels
        .iter()
        .map(|d| channel_expected_distortion(table, d))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Profile;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(n: usize, steps: Vec<i64>, seed: u64) -> CostTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = steps.len();
        let zero = steps.iter().position(|&s| s == 0).unwrap();
        let costs = (0..n * 3 * w)
            .map(|k| if k % w == zero { 0.0 } else { rng.gen_range(0.01..1.0) })
            .collect();
        CostTable::from_raw(n, steps, costs, Profile::IfpdCs)
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_payload(3.0).per_channel, [1.0, 1.0, 1.0]);
        assert_eq!(split_payload(1.5).per_channel, [0.5, 0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn split_sums(alpha in 0.01f64..12.0, a in 0.1f64..5.0, b in 0.1f64..5.0, c in 0.1f64..5.0) {
            let p = split_payload_with(alpha, [a, b, c]);
            prop_assert!((p.per_channel.iter().sum::<f64>() - alpha).abs() <= 1e-12 * alpha);
        }

        #[test]
        fn rows_sum_to_one(costs in proptest::collection::vec(0.0f64..10.0, 2..16), lambda in 0.0f64..1e6) {
            let mut out = vec![0.0; costs.len()];
            let h = gibbs_row(&costs, lambda, &mut out);
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((h - entropy(&out)).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[0.5, 0.5]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0, 0.0]), 0.0);
        assert!((entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn constant_costs_give_uniform() {
        let t = CostTable::from_raw(10, vec![-1, 0, 1], vec![0.5; 90], Profile::Vnd);
        let d = solve_lambda(&t, Channel::X, 5.0).unwrap();
        assert_eq!(d.lambda, 0.0);
        assert!(d.probs.iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn two_change_closed_form() {
        let n = 50;
        let c = 0.7;
        let costs: Vec<f64> = (0..n * 3).flat_map(|_| [0.0, c]).collect();
        let t = CostTable::from_raw(n, vec![0, 1], costs, Profile::IfpdCs);
        for p in [0.05, 0.2, 0.35, 0.45] {
            let target = n as f64 * entropy(&[p, 1.0 - p]);
            let d = solve_lambda(&t, Channel::Y, target).unwrap();
            let exact = ((1.0 - p) / p).ln() / c;
            assert!((d.lambda - exact).abs() < 1e-9, "{} vs {}", d.lambda, exact);
            let p1 = 1.0 / (1.0 + (d.lambda * c).exp());
            assert!((d.row(0)[1] - p1).abs() < 1e-12);
        }
    }

    #[test]
    fn meets_entropy_target() {
        let t = random_table(300, vec![-1, 0, 1, 2], 3);
        for alpha_j in [0.5, 1.0, 1.5] {
            let target = alpha_j * 300.0 * 2f64.ln();
            let d = solve_lambda(&t, Channel::Z, target).unwrap();
            assert!((d.entropy - target).abs() <= 1e-6 * target);
        }
    }

    #[test]
    fn entropy_monotone_in_lambda() {
        let t = random_table(200, vec![-3, -2, -1, 0, 1, 2, 3, 4], 8);
        let mut last = f64::INFINITY;
        for k in 0..100 {
            let h = channel_entropy(&t, Channel::X, k as f64 * 0.5);
            assert!(h <= last + 1e-9);
            last = h;
        }
    }

    #[test]
    fn capacity_and_degenerate_errors() {
        let t = random_table(10, vec![0, 1], 1);
        assert!(matches!(solve_lambda(&t, Channel::X, 100.0), Err(GibbsError::Capacity { .. })));
        assert!(matches!(solve_lambda(&t, Channel::X, 0.0), Err(GibbsError::Degenerate(_))));
    }

    #[test]
    fn cost_scaling_rescales_lambda() {
        let t = random_table(100, vec![-1, 0, 1, 2], 4);
        let mut s = t.clone();
        for c in s.costs.iter_mut() {
            *c *= 4.0;
        }
        let target = 80.0;
        let a = solve_lambda(&t, Channel::X, target).unwrap();
        let b = solve_lambda(&s, Channel::X, target).unwrap();
        assert!((a.lambda - 4.0 * b.lambda).abs() < 1e-7 * a.lambda);
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn expected_distortion_examples() {
        let costs: Vec<f64> = (0..30).flat_map(|_| [0.0, 1.0, 1.0]).collect();
        let t = CostTable::from_raw(10, vec![0, 1, -1], costs, Profile::IfpdCs);
        let uniform = distribution_at(&t, Channel::X, 0.0, 1.0);
        assert!((channel_expected_distortion(&t, &uniform) - 10.0 * 2.0 / 3.0).abs() < 1e-12);
        let point = distribution_at(&t, Channel::X, 1e6, 1.0);
        assert_eq!(channel_expected_distortion(&t, &point), 0.0);
    }

    #[test]
    fn gibbs_beats_perturbed_feasible_distributions() {
        let t = random_table(40, vec![-1, 0, 1, 2], 12);
        let target = 30.0;
        let g = solve_lambda(&t, Channel::X, target).unwrap();
        let best = channel_expected_distortion(&t, &g);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            // perturb one row, then move along lambda to restore the entropy
            let mut q = g.clone();
            let i = rng.gen_range(0..40);
            let (a, b) = (rng.gen_range(0..4), rng.gen_range(0..4));
            let eps = rng.gen_range(0.0..0.05) * q.row(i)[a];
            q.probs[i * 4 + a] -= eps;
            q.probs[i * 4 + b] += eps;
            let h: f64 = (0..40).map(|r| entropy(q.row(r))).sum();
            if h >= target - 1e-12 {
                assert!(channel_expected_distortion(&t, &q) >= best - 1e-9);
            }
        }
    }
}
