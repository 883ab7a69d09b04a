//! Fast ML decoder for the overlaid Alamouti code on quasistatic channels.
//!
//! On a constant channel `r12 = r34 = 0`, so the branch metrics of `x4` and
//! `x3` do not depend on each other (one sort each) and, once `(x3, x4)` is
//! fixed, `x1` and `x2` are decided by independent QAM slices. Under time
//! variation the zeros disappear and the decoder refuses the channel.

use num_complex::Complex64;

use super::{rotate_receive, DecodeResult, Permutation, SearchOptions};
use crate::codes::EffectiveChannel;
use crate::constellation::{sort_alphabet_by_metric, QamAlphabet};
use crate::error::{Result, StcError};
use crate::matrixkit::qr_decompose;

/// `|r12|` and `|r34|` must not exceed this fraction of `‖H‖_F`.
pub const ALAMOUTI_STRUCTURE_TOLERANCE: f64 = 1e-6;

pub fn decode_alamouti_fast(
    ch: &EffectiveChannel,
    y: &[Complex64; 4],
    alphabet: &QamAlphabet,
    options: SearchOptions,
) -> Result<DecodeResult> {
    let qr = qr_decompose(&ch.h)?;
    let r = &qr.r;
    let limit = ALAMOUTI_STRUCTURE_TOLERANCE * ch.h.frobenius_norm();
    let (r12, r34) = (r[(0, 1)].norm(), r[(2, 3)].norm());
    if r12 > limit || r34 > limit {
        return Err(StcError::AlamoutiStructure(format!(
            "|r12| = {:.3e}, |r34| = {:.3e} exceed {:.3e}",
            r12, r34, limit
        )));
    }
    let z = rotate_receive(&qr.q, y);
    let (r11, r22, r33, r44) = (r[(0, 0)].re, r[(1, 1)].re, r[(2, 2)].re, r[(3, 3)].re);
    let (r13, r14, r23, r24) = (r[(0, 2)], r[(0, 3)], r[(1, 2)], r[(1, 3)]);

    let (order4, metric4) = sort_alphabet_by_metric(alphabet, |s| (z[3] - s * r44).norm_sqr());
    let (order3, metric3) = sort_alphabet_by_metric(alphabet, |s| (z[2] - s * r33).norm_sqr());

    let pruning = options.pruning;
    let mut nodes = 0u64;
    let mut radius = f64::INFINITY;
    let mut best: Option<[usize; 4]> = None;
    for (&k4, &p4) in order4.iter().zip(&metric4) {
        nodes += 1;
        if pruning && p4 > radius {
            break;
        }
        let x4 = alphabet.symbol(k4);
        for (&k3, &p3) in order3.iter().zip(&metric3) {
            nodes += 1;
            if pruning && p3 + p4 > radius {
                break;
            }
            let x3 = alphabet.symbol(k3);
            let v2 = z[1] - r23 * x3 - r24 * x4;
            let v1 = z[0] - r13 * x3 - r14 * x4;
            // two PAM slices per symbol
            let (x2, k2) = alphabet.slice(v2 / r22);
            let (x1, k1) = alphabet.slice(v1 / r11);
            nodes += 4;
            let total = p4 + p3 + (v2 - x2 * r22).norm_sqr() + (v1 - x1 * r11).norm_sqr();
            if total < radius {
                radius = total;
                best = Some([k1, k2, k3, k4]);
            }
        }
    }
    let indices = best.expect("an infinite initial radius always admits a candidate");
    Ok(DecodeResult {
        x_hat: indices.map(|k| alphabet.symbol(k)),
        indices,
        cost: radius,
        nodes_visited: nodes,
        full_sorts: 2,
        permutation_used: Permutation::IDENTITY,
    })
}
