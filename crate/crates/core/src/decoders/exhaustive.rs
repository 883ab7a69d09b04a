use num_complex::Complex64;

use super::{DecodeResult, Permutation};
use crate::codes::EffectiveChannel;
use crate::constellation::QamAlphabet;
use crate::error::{Result, StcError};

/// Largest search space the oracle accepts (`64⁴`).
pub const EXHAUSTIVE_CAP: u64 = 1 << 24;

/// Brute-force ML over all `M⁴` candidates.
///
/// Candidates are scanned in lexicographic index order and only a strictly
/// smaller cost replaces the incumbent, so ties resolve to the
/// lexicographically smallest index tuple.
pub fn decode_exhaustive(
    ch: &EffectiveChannel,
    y: &[Complex64; 4],
    alphabet: &QamAlphabet,
) -> Result<DecodeResult> {
    let m = alphabet.order();
    let space = (m as u64).pow(4);
    if space > EXHAUSTIVE_CAP {
        return Err(StcError::ExhaustiveCap(space));
    }
    // contribution[col][k] = column `col` of H times symbol k
    let contribution: Vec<Vec<[Complex64; 4]>> = (0..4)
        .map(|col| {
            alphabet
                .symbols()
                .iter()
                .map(|&s| {
                    let mut v = [Complex64::new(0.0, 0.0); 4];
                    for (r, vr) in v.iter_mut().enumerate() {
                        *vr = ch.h[(r, col)] * s;
                    }
                    v
                })
                .collect()
        })
        .collect();

    let sub = |a: &[Complex64; 4], b: &[Complex64; 4]| {
        let mut out = *a;
        for (o, bv) in out.iter_mut().zip(b) {
            *o -= bv;
        }
        out
    };

    let mut best_cost = f64::INFINITY;
    let mut best = [0usize; 4];
    for i1 in 0..m {
        let r1 = sub(y, &contribution[0][i1]);
        for i2 in 0..m {
            let r2 = sub(&r1, &contribution[1][i2]);
            for i3 in 0..m {
                let r3 = sub(&r2, &contribution[2][i3]);
                for (i4, c4) in contribution[3].iter().enumerate() {
                    let cost: f64 = (0..4).map(|r| (r3[r] - c4[r]).norm_sqr()).sum();
                    if cost < best_cost {
                        best_cost = cost;
                        best = [i1, i2, i3, i4];
                    }
                }
            }
        }
    }
    Ok(DecodeResult {
        x_hat: best.map(|k| alphabet.symbol(k)),
        indices: best,
        cost: best_cost,
        nodes_visited: space,
        full_sorts: 0,
        permutation_used: Permutation::IDENTITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, sample_noise, stream_rng, ChannelModel};
    use crate::codes::{effective_channel, CodeVariant};
    use crate::constellation::make_qam;
    use rand::Rng;

    #[test]
    fn noiseless_recovers_input() {
        let a = make_qam(4).unwrap();
        let mut rng = stream_rng(2, 0);
        for _ in 0..20 {
            let ch = sample_channel(&mut rng, ChannelModel::Quasistatic).unwrap();
            let eff = effective_channel(&ch, CodeVariant::GoldenDv);
            let idx: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..4));
            let x = idx.map(|k| a.symbol(k));
            let y = eff.apply(&x, &[Complex64::new(0.0, 0.0); 4]);
            let r = decode_exhaustive(&eff, &y, &a).unwrap();
            assert_eq!(r.indices, idx);
            assert!(r.cost < 1e-20);
            assert_eq!(r.nodes_visited, 256);
        }
    }

    #[test]
    fn noisy_cost_is_global_minimum() {
        let a = make_qam(4).unwrap();
        let mut rng = stream_rng(3, 0);
        for _ in 0..10 {
            let ch = sample_channel(&mut rng, ChannelModel::Rapid).unwrap();
            let eff = effective_channel(&ch, CodeVariant::GoldenDv);
            let x = [a.symbol(1), a.symbol(2), a.symbol(3), a.symbol(0)];
            let y = eff.apply(&x, &sample_noise(&mut rng, 1.0));
            let r = decode_exhaustive(&eff, &y, &a).unwrap();
            assert!((eff.cost(&y, &r.x_hat) - r.cost).abs() < 1e-12);
            for n in 0..256usize {
                let cand = [n / 64, (n / 16) % 4, (n / 4) % 4, n % 4].map(|k| a.symbol(k));
                assert!(eff.cost(&y, &cand) >= r.cost);
            }
        }
    }

    #[test]
    fn cap_rejects_256_qam() {
        let a = make_qam(256).unwrap();
        let ch = sample_channel(&mut stream_rng(0, 0), ChannelModel::Quasistatic).unwrap();
        let eff = effective_channel(&ch, CodeVariant::GoldenDv);
        let y = [Complex64::new(0.0, 0.0); 4];
        assert_eq!(
            decode_exhaustive(&eff, &y, &a),
            Err(StcError::ExhaustiveCap(1 << 32))
        );
    }
}
