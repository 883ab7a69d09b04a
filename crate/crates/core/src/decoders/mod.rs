//! Maximum-likelihood decoders for the effective 4x4 channel.
//!
//! All decoders minimize `‖y − H x‖²` over `x ∈ A⁴` and report how much of
//! the search tree they touched. A node is one candidate branch-metric
//! evaluation:
//!
//! * fast golden decoder: each iteration of the two outer loops over the
//!   sorted `b^R` and `b^I` candidates, each candidate taken from a PAM list
//!   in the two real inner searches, and each PAM slicer decision;
//! * conventional sphere decoder: every partial-metric evaluation at every
//!   level, including the evaluations made to order a node's children;
//! * fast Alamouti decoder: each iteration of the two loops over `x4` and
//!   `x3`, plus the four PAM slices deciding `x1` and `x2`;
//! * exhaustive search: every one of the `M⁴` candidates.
//!
//! With pruning disabled the fast golden decoder therefore visits exactly
//! `M + M² + 4·M^2.5` nodes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::codes::EffectiveChannel;
use crate::constellation::QamAlphabet;
use crate::error::{Result, StcError};
use crate::matrixkit::{qr_decompose, ComplexMat};

mod alamouti;
mod exhaustive;
mod fast_golden;
mod sphere;

pub use alamouti::{decode_alamouti_fast, ALAMOUTI_STRUCTURE_TOLERANCE};
pub use exhaustive::{decode_exhaustive, EXHAUSTIVE_CAP};
pub use fast_golden::decode_fast_golden;
pub use sphere::decode_sphere_conventional;

/// Column order: position `p` of the permuted channel holds original column
/// `self.0[p]` (zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Permutation(pub [usize; 4]);

impl Permutation {
    pub const IDENTITY: Permutation = Permutation([0, 1, 2, 3]);

    /// The eight orderings that keep the A and D blocks of `R` real.
    pub const FAST_ALLOWED: [Permutation; 8] = [
        Permutation([0, 1, 2, 3]),
        Permutation([0, 1, 3, 2]),
        Permutation([1, 0, 2, 3]),
        Permutation([1, 0, 3, 2]),
        Permutation([2, 3, 0, 1]),
        Permutation([2, 3, 1, 0]),
        Permutation([3, 2, 0, 1]),
        Permutation([3, 2, 1, 0]),
    ];

    /// Parses one-based digits such as `"1243"`.
    pub fn from_one_based(s: &str) -> Option<Self> {
        let digits: Vec<usize> = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()?;
        if digits.len() != 4 {
            return None;
        }
        let mut order = [0; 4];
        for (p, d) in digits.into_iter().enumerate() {
            order[p] = d.checked_sub(1)?;
        }
        let p = Permutation(order);
        p.is_valid().then_some(p)
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = [false; 4];
        for &c in &self.0 {
            if c >= 4 || seen[c] {
                return false;
            }
            seen[c] = true;
        }
        true
    }

    /// Reorders the columns of `h`.
    pub fn apply_columns(&self, h: &ComplexMat) -> ComplexMat {
        h.permute_columns(&self.0)
    }

    /// Maps a vector decided in permuted order back to original order.
    pub fn unpermute<T: Copy>(&self, permuted: &[T; 4]) -> [T; 4] {
        let mut out = permuted.to_owned();
        for (p, &src) in self.0.iter().enumerate() {
            out[src] = permuted[p];
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.0 {
            write!(f, "{}", c + 1)?;
        }
        Ok(())
    }
}

/// `check_fast_permutation(perm)`.
pub fn check_fast_permutation(perm: &Permutation) -> bool {
    Permutation::FAST_ALLOWED.contains(perm)
}

/// Column-ordering policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ordering {
    None,
    Blast,
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering::None => "none",
            Ordering::Blast => "blast",
        })
    }
}

impl FromStr for Ordering {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(Ordering::None),
            "blast" => Ok(Ordering::Blast),
            other => Err(format!("unknown ordering '{other}'")),
        }
    }
}

/// Tree-search switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// When false every sphere-radius break is skipped and the full tree is
    /// walked; radius updates still happen, so the result is still ML.
    pub pruning: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { pruning: true }
    }
}

/// Outcome of one decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub x_hat: [Complex64; 4],
    /// Alphabet indices of `x_hat`.
    pub indices: [usize; 4],
    /// `‖y − H x̂‖²` as accumulated by the decoder.
    pub cost: f64,
    pub nodes_visited: u64,
    pub full_sorts: u64,
    pub permutation_used: Permutation,
}

/// Selectable decoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderKind {
    AlamoutiFast,
    Exhaustive,
    Fast,
    Sphere,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::AlamoutiFast => "alamouti-fast",
            DecoderKind::Exhaustive => "exhaustive",
            DecoderKind::Fast => "fast",
            DecoderKind::Sphere => "sphere",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "alamouti-fast" | "alamouti" => Ok(DecoderKind::AlamoutiFast),
            "exhaustive" => Ok(DecoderKind::Exhaustive),
            "fast" | "fast-golden" => Ok(DecoderKind::Fast),
            "sphere" | "conventional" => Ok(DecoderKind::Sphere),
            other => Err(format!("unknown decoder '{other}'")),
        }
    }
}

/// Runs `kind` on one instance.
pub fn decode(
    kind: DecoderKind,
    ch: &EffectiveChannel,
    y: &[Complex64; 4],
    alphabet: &QamAlphabet,
    ordering: Ordering,
    options: SearchOptions,
) -> Result<DecodeResult> {
    match kind {
        DecoderKind::Exhaustive => decode_exhaustive(ch, y, alphabet),
        DecoderKind::Fast => {
            let perm = match ordering {
                Ordering::None => Permutation::IDENTITY,
                Ordering::Blast => fast_blast_ordering(&ch.h)?,
            };
            decode_fast_golden(ch, y, alphabet, perm, options)
        }
        DecoderKind::Sphere => decode_sphere_conventional(ch, y, alphabet, ordering, options),
        DecoderKind::AlamoutiFast => decode_alamouti_fast(ch, y, alphabet, options),
    }
}

/// Squared norm of column `j` after projecting out the columns in `others`.
fn residual_gain(h: &ComplexMat, j: usize, others: &[usize]) -> f64 {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(others.len());
    for &o in others {
        let mut w = h.column(o);
        for _ in 0..2 {
            for b in &basis {
                let c: Complex64 = b.iter().zip(&w).map(|(p, q)| p.conj() * q).sum();
                for (wk, bk) in w.iter_mut().zip(b) {
                    *wk -= c * bk;
                }
            }
        }
        let n = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            basis.push(w.iter().map(|v| v / n).collect());
        }
    }
    let mut w = h.column(j);
    for _ in 0..2 {
        for b in &basis {
            let c: Complex64 = b.iter().zip(&w).map(|(p, q)| p.conj() * q).sum();
            for (wk, bk) in w.iter_mut().zip(b) {
                *wk -= c * bk;
            }
        }
    }
    w.iter().map(|v| v.norm_sqr()).sum()
}

/// V-BLAST ordering for the conventional sphere decoder.
///
/// Positions are filled from the root of the tree (detected first, last
/// column) downward. At each step the remaining column with the largest
/// gain after projecting out all other remaining columns takes the slot;
/// near-ties (relative 1e-12) go to the highest original index, so channels
/// with orthogonal equal-norm columns keep their natural order.
pub fn blast_ordering(h: &ComplexMat) -> Result<Permutation> {
    let scale = h.frobenius_norm().powi(2);
    let mut remaining: Vec<usize> = (0..4).collect();
    let mut order = [0usize; 4];
    for pos in (0..4).rev() {
        let mut best: Option<(usize, f64)> = None;
        for &j in &remaining {
            let others: Vec<usize> = remaining.iter().copied().filter(|&o| o != j).collect();
            let g = residual_gain(h, j, &others);
            best = match best {
                Some((_, bg)) if g < bg - 1e-12 * scale => best,
                Some((bj, bg)) if (g - bg).abs() <= 1e-12 * scale && j < bj => best,
                _ => Some((j, g)),
            };
        }
        let (j, g) = best.expect("nonempty remaining set");
        if !(g > (crate::matrixkit::RANK_TOLERANCE * scale.sqrt()).powi(2)) {
            return Err(StcError::DegenerateChannel {
                column: j,
                residual: g.sqrt(),
            });
        }
        order[pos] = j;
        remaining.retain(|&o| o != j);
    }
    Ok(Permutation(order))
}

/// BLAST criterion restricted to the eight fast-decodable orderings: the
/// permutation maximizing the smallest diagonal entry of `R` (first in list
/// order on ties).
pub fn fast_blast_ordering(h: &ComplexMat) -> Result<Permutation> {
    let mut best = (Permutation::IDENTITY, f64::NEG_INFINITY);
    for perm in Permutation::FAST_ALLOWED {
        let f = qr_decompose(&perm.apply_columns(h))?;
        let min_diag = (0..4).map(|i| f.r[(i, i)].re).fold(f64::INFINITY, f64::min);
        if min_diag > best.1 {
            best = (perm, min_diag);
        }
    }
    Ok(best.0)
}

/// `Q* y`.
pub(crate) fn rotate_receive(q: &ComplexMat, y: &[Complex64; 4]) -> [Complex64; 4] {
    let mut z = [Complex64::new(0.0, 0.0); 4];
    for (j, zj) in z.iter_mut().enumerate() {
        *zj = (0..4).map(|i| q[(i, j)].conj() * y[i]).sum();
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fast_permutation_list() {
        for s in ["1234", "1243", "2134", "2143", "3412", "3421", "4312", "4321"] {
            let p = Permutation::from_one_based(s).unwrap();
            assert!(check_fast_permutation(&p), "{s}");
            assert_eq!(p.to_string(), s);
        }
        assert!(!check_fast_permutation(&Permutation::from_one_based("1324").unwrap()));
        let allowed = (0..24)
            .filter_map(|n| {
                let mut pool = vec![0, 1, 2, 3];
                let mut order = [0; 4];
                let mut k = n;
                for (p, slot) in order.iter_mut().enumerate() {
                    let f = [6, 2, 1, 1][p];
                    *slot = pool.remove(k / f);
                    k %= f;
                }
                check_fast_permutation(&Permutation(order)).then_some(order)
            })
            .count();
        assert_eq!(allowed, 8);
    }

    #[test]
    fn permutation_parsing_rejects_garbage() {
        assert!(Permutation::from_one_based("1123").is_none());
        assert!(Permutation::from_one_based("12345").is_none());
        assert!(Permutation::from_one_based("0123").is_none());
        assert!(Permutation::from_one_based("12a4").is_none());
    }

    #[test]
    fn unpermute_inverts_apply() {
        let p = Permutation([2, 0, 3, 1]);
        let x = [10, 11, 12, 13];
        let permuted = [x[2], x[0], x[3], x[1]];
        assert_eq!(p.unpermute(&permuted), x);
    }

    #[test]
    fn blast_identity_for_orthogonal_columns() {
        assert_eq!(
            blast_ordering(&ComplexMat::identity(4)).unwrap(),
            Permutation::IDENTITY
        );
        let h = ComplexMat::identity(4).scale(c(0.0, 3.0));
        assert_eq!(blast_ordering(&h).unwrap(), Permutation::IDENTITY);
    }

    #[test]
    fn blast_detects_strong_column_first() {
        for strong in 0..4 {
            let mut h = ComplexMat::from_rows(&[
                [c(1.0, 0.0), c(0.2, 0.1), c(0.0, 0.3), c(0.1, 0.0)],
                [c(0.1, -0.2), c(1.0, 0.0), c(0.2, 0.0), c(0.0, 0.1)],
                [c(0.0, 0.1), c(0.1, 0.1), c(1.0, 0.0), c(0.3, 0.0)],
                [c(0.2, 0.0), c(0.0, -0.1), c(0.1, 0.2), c(1.0, 0.0)],
            ]);
            for i in 0..4 {
                h[(i, strong)] *= 10.0;
            }
            let p = blast_ordering(&h).unwrap();
            assert_eq!(p.0[3], strong, "column {strong} should be detected first");
            assert!(p.is_valid());
        }
    }

    #[test]
    fn blast_rejects_rank_deficiency() {
        let mut h = ComplexMat::identity(4);
        h[(2, 2)] = c(0.0, 0.0);
        assert!(blast_ordering(&h).is_err());
    }

    #[test]
    fn decoder_names_roundtrip() {
        for k in [
            DecoderKind::AlamoutiFast,
            DecoderKind::Exhaustive,
            DecoderKind::Fast,
            DecoderKind::Sphere,
        ] {
            assert_eq!(k.name().parse::<DecoderKind>(), Ok(k));
        }
        assert!("viterbi".parse::<DecoderKind>().is_err());
    }
}
