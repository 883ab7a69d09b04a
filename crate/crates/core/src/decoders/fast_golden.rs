//! Fast ML decoder for the golden code.
//!
//! Because the A and D blocks of `R` are real, the cost splits into four
//! real branch metrics
//!
//! ```text
//! P = ‖v^I − A a^I‖² + ‖v^R − A a^R‖² + ‖z34^I − D b^I‖² + ‖z34^R − D b^R‖²
//!          P1               P2                P3                 P4
//! ```
//!
//! with `v = z12 − B b`. The search runs a two-level complex sphere decoder
//! over `b = (x3, x4)` whose two levels are the pairs `b^R = (x3^R, x4^R)`
//! and `b^I = (x3^I, x4^I)`. Each pair is represented by one QAM symbol
//! (real part for `x3`, imaginary part for `x4`), so each level is a single
//! sort of the alphabet, done once per decode. For every surviving `b`, two
//! independent two-level real sphere decoders find `a^R` and `a^I`.

use num_complex::Complex64;

use super::{rotate_receive, DecodeResult, Permutation, SearchOptions};
use crate::codes::EffectiveChannel;
use crate::constellation::{sort_alphabet_by_metric, PamAlphabet, QamAlphabet};
use crate::error::{Result, StcError};
use crate::matrixkit::qr_decompose;

/// Outcome of one real two-level search.
#[derive(Debug, Clone, Copy)]
struct RealPair {
    cost: f64,
    first: usize,
    second: usize,
}

/// ML over `(a1, a2) ∈ PAM²` for the real channel
/// `[[r11, r12], [0, r22]]` with outputs `(v1, v2)`.
///
/// The second coordinate is enumerated in Schnorr-Euchner order and the
/// first is decided by the slicer. The radius starts at infinity for every
/// call.
#[inline]
fn real_pair_search(
    v1: f64,
    v2: f64,
    r11: f64,
    r12: f64,
    r22: f64,
    pam: &PamAlphabet,
    pruning: bool,
    nodes: &mut u64,
) -> RealPair {
    let mut best = RealPair {
        cost: f64::INFINITY,
        first: 0,
        second: 0,
    };
    for (x2, i2) in pam.sorted_list(v2 / r22) {
        *nodes += 1;
        let d2 = v2 - r22 * x2;
        let partial = d2 * d2;
        if pruning && partial > best.cost {
            break;
        }
        let u1 = v1 - r12 * x2;
        let (x1, i1) = pam.slice(u1 / r11);
        *nodes += 1;
        let d1 = u1 - r11 * x1;
        let total = d1 * d1 + partial;
        if total < best.cost {
            best = RealPair {
                cost: total,
                first: i1,
                second: i2,
            };
        }
    }
    best
}

/// Fast ML decoding of a golden-code effective channel.
///
/// `perm` must be one of [`Permutation::FAST_ALLOWED`]; the channel columns
/// are reordered before factorization and the decision is mapped back.
pub fn decode_fast_golden(
    ch: &EffectiveChannel,
    y: &[Complex64; 4],
    alphabet: &QamAlphabet,
    perm: Permutation,
    options: SearchOptions,
) -> Result<DecodeResult> {
    if !ch.variant.is_golden() {
        return Err(StcError::NotGoldenCode(ch.variant.name()));
    }
    if !super::check_fast_permutation(&perm) {
        return Err(StcError::DisallowedPermutation(perm.to_string()));
    }
    let pruning = options.pruning;
    let qr = qr_decompose(&perm.apply_columns(&ch.h))?;
    let r = &qr.r;
    debug_assert!(
        r[(0, 1)].im.abs() <= 1e-9 * ch.h.frobenius_norm()
            && r[(2, 3)].im.abs() <= 1e-9 * ch.h.frobenius_norm(),
        "A and D blocks must be real"
    );
    let z = rotate_receive(&qr.q, y);

    // real A and D blocks
    let (r11, r12, r22) = (r[(0, 0)].re, r[(0, 1)].re, r[(1, 1)].re);
    let (r33, r34, r44) = (r[(2, 2)].re, r[(2, 3)].re, r[(3, 3)].re);
    let (r13, r14, r23, r24) = (r[(0, 2)], r[(0, 3)], r[(1, 2)], r[(1, 3)]);
    let (z3, z4) = (z[2], z[3]);

    // one alphabet symbol `s` stands for the real pair (x3, x4) = (s^R, s^I)
    let (order4, metric4) = sort_alphabet_by_metric(alphabet, |s| {
        let e3 = z3.re - r33 * s.re - r34 * s.im;
        let e4 = z4.re - r44 * s.im;
        e3 * e3 + e4 * e4
    });
    let (order3, metric3) = sort_alphabet_by_metric(alphabet, |s| {
        let e3 = z3.im - r33 * s.re - r34 * s.im;
        let e4 = z4.im - r44 * s.im;
        e3 * e3 + e4 * e4
    });
    let full_sorts = 2;

    let pam = alphabet.pam();
    let mut nodes = 0u64;
    let mut radius = f64::INFINITY;
    let mut best: Option<[usize; 4]> = None;

    for (&k_re, &p4) in order4.iter().zip(&metric4) {
        nodes += 1;
        if pruning && p4 > radius {
            break;
        }
        let s_re = alphabet.symbol(k_re);
        for (&k_im, &p3) in order3.iter().zip(&metric3) {
            nodes += 1;
            if pruning && p3 + p4 > radius {
                break;
            }
            let s_im = alphabet.symbol(k_im);
            let x3 = Complex64::new(s_re.re, s_im.re);
            let x4 = Complex64::new(s_re.im, s_im.im);
            let v1 = z[0] - r13 * x3 - r14 * x4;
            let v2 = z[1] - r23 * x3 - r24 * x4;

            let a_re = real_pair_search(v1.re, v2.re, r11, r12, r22, pam, pruning, &mut nodes);
            let a_im = real_pair_search(v1.im, v2.im, r11, r12, r22, pam, pruning, &mut nodes);

            let total = a_im.cost + a_re.cost + p3 + p4;
            if total < radius {
                radius = total;
                let (x3_re, x4_re) = alphabet.axes_of(k_re);
                let (x3_im, x4_im) = alphabet.axes_of(k_im);
                best = Some([
                    alphabet.index_of(a_re.first, a_im.first),
                    alphabet.index_of(a_re.second, a_im.second),
                    alphabet.index_of(x3_re, x3_im),
                    alphabet.index_of(x4_re, x4_im),
                ]);
            }
        }
    }

    let permuted = best.expect("an infinite initial radius always admits a candidate");
    let indices = perm.unpermute(&permuted);
    Ok(DecodeResult {
        x_hat: indices.map(|k| alphabet.symbol(k)),
        indices,
        cost: radius,
        nodes_visited: nodes,
        full_sorts,
        permutation_used: perm,
    })
}
