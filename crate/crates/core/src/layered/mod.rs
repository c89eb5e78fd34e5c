//! Multi-layer embedding: every channel's change distribution is realized
//! one bitplane at a time, least significant first, with a binary
//! syndrome-trellis pass per layer guided by the conditional bit
//! probabilities of [`bmp`].

pub mod bmp;
pub mod changeset;

pub use bmp::{advance, bmp_layer, conditional_zero, flip_cost, layer_conditional_entropies, LayerState};
pub use changeset::{determine_q, pad_changeset, ChangeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distortion::CostTable;
use crate::error::StegoError;
use crate::gibbs::{channel_expected_distortion, entropy, solve_lambda, ChannelDistribution};
use crate::mesh::Mesh;
use crate::params::{StegoParams, PARAMS_VERSION};
use crate::quant::{bit, from_fixed, integer_map, stego_bit_width, Channel, QuantizedChannel};
use crate::stc::{build_submatrix, stc_decode, stc_encode, DEFAULT_HEIGHT, WET_COST};

/// Fraction of a channel's entropy that is actually filled with message bits.
pub const SAFETY: f64 = 0.95;

/// Sender-side settings that are not derived from the message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedConfig {
    pub k_star: u32,
    pub changes: ChangeSet,
    pub alpha_split: [f64; 3],
    pub stc_height: u32,
    pub stc_seed: u64,
    pub safety: f64,
    pub channel_order: [Channel; 3],
}

impl EmbedConfig {
    pub fn new(changes: ChangeSet) -> Self {
        EmbedConfig {
            k_star: 6,
            changes,
            alpha_split: [1.0, 1.0, 1.0],
            stc_height: DEFAULT_HEIGHT,
            stc_seed: 0,
            safety: SAFETY,
            channel_order: Channel::ALL,
        }
    }
}

/// Per-channel seed for the layer submatrices.
pub fn derive_seed(seed: u64, channel: Channel, layer: u32) -> u64 {
    let mut z = seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(1 + channel.index() as u64 * 64 + layer as u64));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Split `total` into parts proportional to `weights` by largest remainder.
pub fn allocate(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if total == 0 || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = total - parts.iter().sum::<usize>().min(total);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if weights[k] > 0.0 {
            parts[k] += 1;
            left -= 1;
        }
    }
    parts
}

/// Most message bits one channel of `n` vertices can take.
pub fn channel_capacity_bits(n: usize, changes: &ChangeSet, safety: f64) -> usize {
    let bound = safety * n as f64 * (changes.len() as f64).log2();
    // strictly below the maximum entropy
    (bound.ceil() as usize).saturating_sub(1)
}

/// Most message bits the whole mesh can take under `alpha_split`.
pub fn capacity_bits(n: usize, changes: &ChangeSet, alpha_split: [f64; 3], safety: f64) -> usize {
    let cap = channel_capacity_bits(n, changes, safety);
    let fits = |total: usize| allocate(total, &alpha_split).iter().all(|&b| b <= cap);
    let (mut lo, mut hi) = (0usize, 3 * cap + 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub channel: Channel,
    pub message_bits: usize,
    pub layer_bits: Vec<usize>,
    /// Expected conditional entropy per layer, bits.
    pub layer_entropy_bits: Vec<f64>,
    pub target_nats: f64,
    pub entropy_nats: f64,
    pub lambda: f64,
    pub expected_distortion: f64,
    /// Sum of the chosen costs over the realized changes.
    pub realized_distortion: f64,
    pub changed_vertices: usize,
    /// Per real step: how often it was used, how often the distribution
    /// predicts, and the multinomial variance of that prediction.
    pub realized_counts: Vec<usize>,
    pub expected_counts: Vec<f64>,
    pub count_variances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub vertex_count: usize,
    pub message_bits: usize,
    pub alpha: f64,
    pub capacity_bits: usize,
    pub expected_distortion: f64,
    pub channels: Vec<ChannelReport>,
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub stego: Mesh,
    pub params: StegoParams,
    pub report: EmbedReport,
    /// Realized step of every vertex, indexed by channel.
    pub steps: [Vec<i64>; 3],
    /// Solved distributions (empty for channels that carry nothing).
    pub distributions: Vec<Option<ChannelDistribution>>,
}

struct ChannelOutcome {
    steps: Vec<i64>,
    lens: Vec<usize>,
    report: ChannelReport,
    dist: Option<ChannelDistribution>,
}

fn padded_probs(dist: &ChannelDistribution, changes: &ChangeSet) -> Vec<f64> {
    let w = changes.padded().len();
    let n = dist.vertex_count();
    let mut out = vec![0.0; n * w];
    for i in 0..n {
        out[i * w..i * w + changes.len()].copy_from_slice(dist.row(i));
    }
    out
}

/// Layer passes retried after a wet flip before giving up.
pub const MAX_REALLOCATIONS: usize = 64;

/// A layer whose syndrome could only be met by flipping a wet bit.
struct WetLayer {
    layer: usize,
    vertex: usize,
    /// Conditional entropy of that layer under the realized lower layers, bits.
    free_bits: f64,
}

/// One pass over all layers with fixed lengths.
fn embed_layers(
    q: &QuantizedChannel,
    bits: &[u8],
    config: &EmbedConfig,
    probs: &[f64],
    lens: &[usize],
) -> Result<Result<LayerState, WetLayer>, StegoError> {
    let cs = &config.changes;
    let n = q.len();
    let mut state = LayerState::new(n, cs);
    let mut offset = 0;
    for l in 1..=cs.q() {
        let p0 = bmp_layer(&q.integers, cs, probs, &state);
        let (reference, flip): (Vec<u8>, Vec<f64>) = q
            .integers
            .iter()
            .zip(&p0)
            .map(|(&v, &p)| flip_cost(p, bit(v, l)))
            .unzip();
        let m = lens[l as usize - 1];
        let sub = build_submatrix(config.stc_height, n, m, derive_seed(config.stc_seed, q.channel, l))?;
        let enc = stc_encode(&reference, &flip, &bits[offset..offset + m], &sub)?;
        if let Some(vertex) = (0..n).find(|&i| enc.stego[i] != reference[i] && flip[i] >= WET_COST) {
            let free: f64 = p0.iter().map(|&p| entropy(&[p, 1.0 - p])).sum();
            return Ok(Err(WetLayer {
                layer: l as usize - 1,
                vertex,
                free_bits: free / std::f64::consts::LN_2,
            }));
        }
        offset += m;
        advance(&mut state, &q.integers, cs, p0, &enc.stego);
    }
    Ok(Ok(state))
}

/// Embed every layer of one channel. A layer that can only be met by
/// flipping a wet bit has too few free positions under the realized lower
/// layers; its shortfall moves one layer down and the channel restarts.
fn run_layers(
    q: &QuantizedChannel,
    bits: &[u8],
    config: &EmbedConfig,
    probs: &[f64],
    lens: &mut [usize],
) -> Result<LayerState, StegoError> {
    let cs = &config.changes;
    let filler = cs.padded().get(cs.len()).copied().unwrap_or(0);
    for _ in 0..MAX_REALLOCATIONS {
        let wet = match embed_layers(q, bits, config, probs, lens)? {
            Ok(state) => return Ok(state),
            Err(w) => w,
        };
        if wet.layer == 0 {
            return Err(StegoError::WetViolation {
                vertex: wet.vertex,
                step: filler,
            });
        }
        let m = lens[wet.layer];
        let fits = (wet.free_bits * config.safety).floor() as usize;
        let shift = m.saturating_sub(fits).clamp(1, m.max(1));
        lens[wet.layer] -= shift;
        lens[wet.layer - 1] += shift;
    }
    Err(StegoError::WetViolation { vertex: 0, step: filler })
}

fn embed_channel(
    q: &QuantizedChannel,
    bits: &[u8],
    config: &EmbedConfig,
    costs: &CostTable,
) -> Result<ChannelOutcome, StegoError> {
    let cs = &config.changes;
    let n = q.len();
    let layers = cs.q() as usize;
    let channel = q.channel;
    let count = cs.len();
    let mut report = ChannelReport {
        channel,
        message_bits: bits.len(),
        layer_bits: vec![0; layers],
        layer_entropy_bits: vec![0.0; layers],
        target_nats: 0.0,
        entropy_nats: 0.0,
        lambda: f64::INFINITY,
        expected_distortion: 0.0,
        realized_distortion: 0.0,
        changed_vertices: 0,
        realized_counts: vec![0; count],
        expected_counts: vec![0.0; count],
        count_variances: vec![0.0; count],
    };
    if bits.is_empty() {
        report.realized_counts[cs.zero_index()] = n;
        report.expected_counts[cs.zero_index()] = n as f64;
        return Ok(ChannelOutcome {
            steps: vec![0; n],
            lens: vec![0; layers],
            report,
            dist: None,
        });
    }

    let target = bits.len() as f64 * std::f64::consts::LN_2 / config.safety;
    let dist = solve_lambda(costs, channel, target)?;
    let probs = padded_probs(&dist, cs);
    let w = cs.padded().len();

    let mut layer_h = vec![0.0; layers];
    for (i, &v) in q.integers.iter().enumerate() {
        let h = layer_conditional_entropies(v, cs, &probs[i * w..(i + 1) * w]);
        for (a, b) in layer_h.iter_mut().zip(h) {
            *a += b;
        }
    }
    let mut lens = allocate(bits.len(), &layer_h);
    let state = run_layers(q, bits, config, &probs, &mut lens)?;

    let mut steps = Vec::with_capacity(n);
    for (i, &mask) in state.survivors.iter().enumerate() {
        debug_assert_eq!(mask.count_ones(), 1);
        let d = mask.trailing_zeros() as usize;
        if cs.is_padding(d) {
            return Err(StegoError::WetViolation {
                vertex: i,
                step: cs.padded()[d],
            });
        }
        report.realized_counts[d] += 1;
        report.realized_distortion += costs.get(i, channel, d);
        steps.push(cs.padded()[d]);
    }
    for i in 0..n {
        for (d, &p) in dist.row(i).iter().enumerate() {
            report.expected_counts[d] += p;
            report.count_variances[d] += p * (1.0 - p);
        }
    }
    report.changed_vertices = steps.iter().filter(|&&s| s != 0).count();
    report.layer_bits = lens.clone();
    report.layer_entropy_bits = layer_h.iter().map(|h| h / std::f64::consts::LN_2).collect();
    report.target_nats = target;
    report.entropy_nats = dist.entropy;
    report.lambda = dist.lambda;
    report.expected_distortion = channel_expected_distortion(costs, &dist);
    Ok(ChannelOutcome {
        steps,
        lens,
        report,
        dist: Some(dist),
    })
}

/// Hide `message` (one bit per byte, 0 or 1) in `mesh`.
///
/// The payload is split over the channels by `config.alpha_split`; each
/// channel's Gibbs distribution is solved for `bits * ln 2 / safety` nats and
/// its bits are spread over the layers in proportion to the layers' expected
/// conditional entropies.
pub fn embed(mesh: &Mesh, message: &[u8], config: &EmbedConfig, costs: &CostTable) -> Result<Embedding, StegoError> {
    let cs = &config.changes;
    let n = mesh.vertex_count();
    if costs.vertex_count != n || costs.steps != cs.steps() {
        return Err(StegoError::CostShape);
    }
    let capacity = capacity_bits(n, cs, config.alpha_split, config.safety);
    if message.len() > capacity {
        return Err(StegoError::Capacity {
            requested: message.len(),
            achievable_bits: capacity,
            achievable_alpha: capacity as f64 / n.max(1) as f64,
        });
    }

    let mut quantized = Vec::with_capacity(3);
    for c in Channel::ALL {
        quantized.push(integer_map(mesh, c, config.k_star)?);
    }
    let h_star = quantized
        .iter()
        .map(|q| stego_bit_width(&q.integers, cs.min_step(), cs.max_step()))
        .max()
        .unwrap_or(1);
    let quantized: Vec<QuantizedChannel> = quantized.into_iter().map(|q| q.with_bit_width(h_star)).collect();

    // message bits in channel order
    let weights: Vec<f64> = config.channel_order.iter().map(|c| config.alpha_split[c.index()]).collect();
    let shares = allocate(message.len(), &weights);
    let mut chunks = Vec::with_capacity(3);
    let mut offset = 0;
    for &s in &shares {
        chunks.push(&message[offset..offset + s]);
        offset += s;
    }

    let outcomes: Vec<Result<ChannelOutcome, StegoError>> = config
        .channel_order
        .par_iter()
        .zip(chunks.par_iter())
        .map(|(&c, bits)| embed_channel(&quantized[c.index()], bits, config, costs))
        .collect();

    let mut steps: [Vec<i64>; 3] = Default::default();
    let mut msg_lens = Vec::with_capacity(3);
    let mut reports = Vec::with_capacity(3);
    let mut distributions = vec![None, None, None];
    for (&c, outcome) in config.channel_order.iter().zip(outcomes) {
        let o = outcome?;
        steps[c.index()] = o.steps;
        msg_lens.push(o.lens);
        reports.push(o.report);
        distributions[c.index()] = o.dist;
    }

    let mut vertices = mesh.vertices().to_vec();
    for c in Channel::ALL {
        let q = &quantized[c.index()];
        let stego = q.apply_steps(&steps[c.index()])?;
        for (v, s) in vertices.iter_mut().zip(stego) {
            v[c.index()] = from_fixed(s, config.k_star);
        }
    }

    let alpha = if n == 0 { 0.0 } else { message.len() as f64 / n as f64 };
    let params = StegoParams {
        version: PARAMS_VERSION,
        k_star: config.k_star,
        h_star,
        changes: cs.clone(),
        alpha,
        alpha_split: config.alpha_split,
        stc_h: config.stc_height,
        stc_seed: config.stc_seed,
        msg_lens,
        channel_order: config.channel_order,
    };
    let report = EmbedReport {
        vertex_count: n,
        message_bits: message.len(),
        alpha,
        capacity_bits: capacity,
        expected_distortion: reports.iter().map(|r| r.expected_distortion).sum(),
        channels: reports,
    };
    Ok(Embedding {
        stego: mesh.with_vertices(vertices),
        params,
        report,
        steps,
        distributions,
    })
}

/// Read the message back: each layer's bits are the syndrome of that
/// bitplane under the shared per-layer submatrix.
pub fn extract(stego: &Mesh, params: &StegoParams) -> Result<Vec<u8>, StegoError> {
    let n = stego.vertex_count();
    let mut out = Vec::with_capacity(params.message_len());
    for (k, &c) in params.channel_order.iter().enumerate() {
        let lens = &params.msg_lens[k];
        if lens.iter().all(|&m| m == 0) {
            continue;
        }
        let q = integer_map(stego, c, params.k_star)?;
        for (l, &m) in lens.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let layer = l as u32 + 1;
            if m > n {
                return Err(StegoError::MeshMismatch {
                    vertices: n,
                    channel: c.label(),
                    layer: layer as usize,
                    needed: m,
                });
            }
            let plane: Vec<u8> = q.integers.iter().map(|&v| bit(v, layer)).collect();
            let sub = build_submatrix(params.stc_h, n, m, derive_seed(params.stc_seed, c, layer))?;
            out.extend(stc_decode(&plane, &sub, m)?);
        }
    }
    Ok(out)
}

/// Bytes to bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |k| (b >> k) & 1))
        .collect()
}

/// Bits to bytes, most significant bit first; a partial last byte is padded
/// with zeros.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | ((b & 1) << (7 - k))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::{compute_costs, CostOptions, Profile};
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(seed: u64, n: usize) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(0..2)).collect()
    }

    #[test]
    fn padded_sets_at_low_payload() {
        // fillers make some layer positions wet; small payloads leave few free ones
        let mesh = fixtures::quantized(&fixtures::noisy_sphere(2, 1.0, 0.02, 9), 6);
        for steps in [vec![-1, 0, 1], vec![-2, -1, 0, 1, 2], (-6..=6).collect()] {
            let cs = ChangeSet::new(&steps).unwrap();
            for profile in [Profile::IfpdCs, Profile::Dihedral] {
                let costs = compute_costs(&mesh, 6, cs.steps(), profile, CostOptions::default()).unwrap();
                for seed in 0..12 {
                    let bits = random_bits(seed, 40 + 9 * seed as usize);
                    let mut config = EmbedConfig::new(cs.clone());
                    config.stc_seed = seed;
                    let out = embed(&mesh, &bits, &config, &costs).unwrap();
                    assert_eq!(extract(&out.stego, &out.params).unwrap(), bits);
                    assert!(out.steps.iter().flatten().all(|s| cs.steps().contains(s)));
                }
            }
        }
    }

    #[test]
    fn allocation_is_exact() {
        assert_eq!(allocate(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(allocate(7, &[0.0, 2.0, 1.0]).iter().sum::<usize>(), 7);
        assert_eq!(allocate(7, &[0.0, 2.0, 1.0])[0], 0);
        assert_eq!(allocate(0, &[1.0]), vec![0]);
    }

    #[test]
    fn bit_order() {
        assert_eq!(bytes_to_bits(&[0b1000_0001]), vec![1, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(bits_to_bytes(&bytes_to_bits(b"mesh")), b"mesh");
    }

    #[test]
    fn empty_message_leaves_cover() {
        let m = fixtures::noisy_sphere(2, 1.0, 0.02, 1);
        let cs = ChangeSet::preset(3.0);
        let costs = compute_costs(&m, 6, cs.steps(), Profile::Vnd, CostOptions::default()).unwrap();
        let e = embed(&m, &[], &EmbedConfig::new(cs), &costs).unwrap();
        assert_eq!(e.stego.vertices(), m.vertices());
        assert!(extract(&e.stego, &e.params).unwrap().is_empty());
    }

    #[test]
    fn round_trip_each_preset() {
        let m = fixtures::noisy_sphere(2, 1.0, 0.02, 5);
        let n = m.vertex_count();
        for (k, alpha) in [1.5, 3.0, 4.5, 6.0].into_iter().enumerate() {
            let cs = ChangeSet::preset(alpha);
            let costs = compute_costs(&m, 6, cs.steps(), Profile::IfpdCs, CostOptions::default()).unwrap();
            let bits = random_bits(k as u64, (alpha * n as f64) as usize);
            let mut config = EmbedConfig::new(cs.clone());
            config.stc_seed = 17;
            let e = embed(&m, &bits, &config, &costs).unwrap();
            assert_eq!(extract(&e.stego, &e.params).unwrap(), bits);
            for steps in &e.steps {
                assert!(steps.iter().all(|s| cs.steps().contains(s)));
            }
            // params survive the text format
            let p: StegoParams = e.params.to_text().parse().unwrap();
            assert_eq!(extract(&e.stego, &p).unwrap(), bits);
        }
    }

    #[test]
    fn deterministic() {
        let m = fixtures::noisy_sphere(2, 1.0, 0.02, 8);
        let cs = ChangeSet::preset(3.0);
        let costs = compute_costs(&m, 6, cs.steps(), Profile::IfpdS1, CostOptions::default()).unwrap();
        let bits = random_bits(3, 300);
        let a = embed(&m, &bits, &EmbedConfig::new(cs.clone()), &costs).unwrap();
        let b = embed(&m, &bits, &EmbedConfig::new(cs), &costs).unwrap();
        assert_eq!(a.stego.vertices(), b.stego.vertices());
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn capacity_guard() {
        let m = fixtures::icosphere(1, 1.0);
        let cs = ChangeSet::preset(1.5);
        let costs = compute_costs(&m, 6, cs.steps(), Profile::Vnd, CostOptions::default()).unwrap();
        let n = m.vertex_count();
        let too_many = random_bits(1, 3 * n);
        match embed(&m, &too_many, &EmbedConfig::new(cs), &costs) {
            Err(StegoError::Capacity { achievable_bits, .. }) => assert!(achievable_bits < 3 * n),
            other => panic!("expected a capacity error, got {other:?}"),
        }
    }
}
