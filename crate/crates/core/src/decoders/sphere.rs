//! Conventional four-level complex sphere decoder.
//!
//! One complex symbol per level, `x4` at the root. Each expanded node
//! evaluates the branch metric of all `M` children, sorts them
//! (Schnorr-Euchner order) and descends depth first, breaking as soon as the
//! partial cost exceeds the radius. At the leaf level the best child is
//! found directly by the QAM slicer.

use num_complex::Complex64;

use super::{blast_ordering, rotate_receive, DecodeResult, Ordering, Permutation, SearchOptions};
use crate::codes::EffectiveChannel;
use crate::constellation::QamAlphabet;
use crate::error::Result;
use crate::matrixkit::{qr_decompose, ComplexMat};

struct Search<'a> {
    r: &'a ComplexMat,
    z: [Complex64; 4],
    alphabet: &'a QamAlphabet,
    pruning: bool,
    radius: f64,
    best: Option<[usize; 4]>,
    current: [usize; 4],
    nodes: u64,
    sorts: u64,
    // per-level scratch for the sorted children
    scratch: [Vec<(usize, f64)>; 4],
}

impl Search<'_> {
    /// `z_l − Σ_{j>l} r_lj x_j`.
    fn residual(&self, level: usize) -> Complex64 {
        let mut b = self.z[level];
        for j in level + 1..4 {
            b -= self.r[(level, j)] * self.alphabet.symbol(self.current[j]);
        }
        b
    }

    fn visit(&mut self, level: usize, partial: f64) {
        let b = self.residual(level);
        let rll = self.r[(level, level)].re;
        if level == 0 {
            let (s, k) = self.alphabet.slice(b / rll);
            self.nodes += 1;
            let total = partial + (b - s * rll).norm_sqr();
            if total < self.radius {
                self.radius = total;
                self.current[0] = k;
                self.best = Some(self.current);
            }
            return;
        }

        let mut children = std::mem::take(&mut self.scratch[level]);
        children.clear();
        children.extend(
            self.alphabet
                .symbols()
                .iter()
                .enumerate()
                .map(|(k, &s)| (k, (b - s * rll).norm_sqr())),
        );
        self.nodes += children.len() as u64;
        children.sort_by(|a, b| a.1.total_cmp(&b.1));
        self.sorts += 1;

        for &(k, metric) in &children {
            let next = partial + metric;
            if self.pruning && next > self.radius {
                break;
            }
            self.current[level] = k;
            self.visit(level - 1, next);
        }
        self.scratch[level] = children;
    }
}

/// ML decoding with a conventional Schnorr-Euchner sphere decoder.
pub fn decode_sphere_conventional(
    ch: &EffectiveChannel,
    y: &[Complex64; 4],
    alphabet: &QamAlphabet,
    ordering: Ordering,
    options: SearchOptions,
) -> Result<DecodeResult> {
    let perm = match ordering {
        Ordering::None => Permutation::IDENTITY,
        Ordering::Blast => blast_ordering(&ch.h)?,
    };
    let qr = qr_decompose(&perm.apply_columns(&ch.h))?;
    let z = rotate_receive(&qr.q, y);
    let mut search = Search {
        r: &qr.r,
        z,
        alphabet,
        pruning: options.pruning,
        radius: f64::INFINITY,
        best: None,
        current: [0; 4],
        nodes: 0,
        sorts: 0,
        scratch: Default::default(),
    };
    search.visit(3, 0.0);
    let permuted = search
        .best
        .expect("an infinite initial radius always admits a candidate");
    let indices = perm.unpermute(&permuted);
    Ok(DecodeResult {
        x_hat: indices.map(|k| alphabet.symbol(k)),
        indices,
        cost: search.radius,
        nodes_visited: search.nodes,
        full_sorts: search.sorts,
        permutation_used: perm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, sample_noise, stream_rng, ChannelModel};
    use crate::codes::{effective_channel, CodeVariant};
    use crate::constellation::make_qam;
    use crate::decoders::decode_exhaustive;
    use rand::Rng;

    #[test]
    fn noiseless_returns_input() {
        let a = make_qam(16).unwrap();
        let mut rng = stream_rng(21, 0);
        for v in CodeVariant::ALL {
            let ch = sample_channel(&mut rng, ChannelModel::Rapid).unwrap();
            let eff = effective_channel(&ch, v);
            let idx: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..16));
            let y = eff.apply(&idx.map(|k| a.symbol(k)), &[Complex64::new(0.0, 0.0); 4]);
            for ordering in [Ordering::None, Ordering::Blast] {
                let r = decode_sphere_conventional(&eff, &y, &a, ordering, SearchOptions::default())
                    .unwrap();
                assert_eq!(r.indices, idx, "{v} {ordering}");
                assert!(r.cost < 1e-18);
            }
        }
    }

    #[test]
    fn matches_oracle_with_and_without_ordering() {
        let a = make_qam(4).unwrap();
        let mut rng = stream_rng(22, 0);
        for _ in 0..100 {
            let ch = sample_channel(&mut rng, ChannelModel::Quasistatic).unwrap();
            let eff = effective_channel(&ch, CodeVariant::GoldenDv);
            let idx: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..4));
            let y = eff.apply(&idx.map(|k| a.symbol(k)), &sample_noise(&mut rng, 1.0));
            let oracle = decode_exhaustive(&eff, &y, &a).unwrap();
            let plain =
                decode_sphere_conventional(&eff, &y, &a, Ordering::None, SearchOptions::default())
                    .unwrap();
            let blast =
                decode_sphere_conventional(&eff, &y, &a, Ordering::Blast, SearchOptions::default())
                    .unwrap();
            assert!((plain.cost - oracle.cost).abs() < 1e-9);
            assert!((blast.cost - oracle.cost).abs() < 1e-9);
            assert!((eff.cost(&y, &blast.x_hat) - blast.cost).abs() < 1e-9);
        }
    }

    #[test]
    fn unpruned_counts() {
        let a = make_qam(4).unwrap();
        let ch = sample_channel(&mut stream_rng(5, 5), ChannelModel::Quasistatic).unwrap();
        let eff = effective_channel(&ch, CodeVariant::GoldenDv);
        let y = [Complex64::new(0.3, -0.2); 4];
        let r = decode_sphere_conventional(
            &eff,
            &y,
            &a,
            Ordering::None,
            SearchOptions { pruning: false },
        )
        .unwrap();
        // M + M·M + M²·M evaluations at the sorted levels, M³ slicer leaves
        assert_eq!(r.nodes_visited, 4 + 16 + 64 + 64);
        assert_eq!(r.full_sorts, 1 + 4 + 16);
    }
}
