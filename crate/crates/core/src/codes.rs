//! Space-time encoders and the effective 4x4 channels they induce.
//!
//! Every code maps `x = (x1, x2, x3, x4)` onto a 2x2 codeword whose row is
//! the time slot and whose column is the transmit antenna. With two receive
//! antennas the four received samples are stacked as
//! `[y1[1], y1[2], y2[1], y2[2]]` (with the second-slot samples conjugated
//! for the overlaid Alamouti code), giving `y = H x + n` for a code-specific
//! effective matrix `H`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::matrixkit::ComplexMat;

/// Constants of the golden code: `θ = ½·atan 2`, `c = cos θ`, `s = sin θ`,
/// `φ = e^{jπ/4}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenConstants {
    pub theta: f64,
    pub c: f64,
    pub s: f64,
    pub phi: Complex64,
}

impl GoldenConstants {
    pub fn new() -> Self {
        let theta = 0.5 * 2f64.atan();
        let (s, c) = theta.sin_cos();
        Self {
            theta,
            c,
            s,
            phi: Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        }
    }

    /// The real rotation `[[c, s], [-s, c]]`.
    pub fn rotation(&self) -> [[f64; 2]; 2] {
        [[self.c, self.s], [-self.s, self.c]]
    }

    /// Block-diagonal `Ψ = diag(rotation, rotation)`.
    pub fn psi(&self) -> ComplexMat {
        let (c, s) = (self.c, self.s);
        ComplexMat::from_real_rows(&[
            [c, s, 0.0, 0.0],
            [-s, c, 0.0, 0.0],
            [0.0, 0.0, c, s],
            [0.0, 0.0, -s, c],
        ])
    }

    fn rotate(&self, p: Complex64, q: Complex64) -> (Complex64, Complex64) {
        (p * self.c + q * self.s, -p * self.s + q * self.c)
    }
}

impl Default for GoldenConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Constants of the overlaid Alamouti code: `φ1 = (1+j)/√7`, `φ2 = (1+2j)/√7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlamoutiConstants {
    pub phi1: Complex64,
    pub phi2: Complex64,
}

impl AlamoutiConstants {
    pub fn new() -> Self {
        let k = 1.0 / 7f64.sqrt();
        Self {
            phi1: Complex64::new(k, k),
            phi2: Complex64::new(k, 2.0 * k),
        }
    }

    /// `(u1, u2)` for the second Alamouti layer.
    pub fn u(&self, x3: Complex64, x4: Complex64) -> (Complex64, Complex64) {
        (
            self.phi1 * x3 + self.phi2 * x4,
            -self.phi2.conj() * x3 + self.phi1.conj() * x4,
        )
    }
}

impl Default for AlamoutiConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Which space-time code is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CodeVariant {
    GoldenDv,
    GoldenBrv,
    GoldenWimax,
    OverlaidAlamouti,
}

impl CodeVariant {
    pub const ALL: [CodeVariant; 4] = [
        CodeVariant::GoldenDv,
        CodeVariant::GoldenBrv,
        CodeVariant::GoldenWimax,
        CodeVariant::OverlaidAlamouti,
    ];

    pub const GOLDEN: [CodeVariant; 3] = [
        CodeVariant::GoldenDv,
        CodeVariant::GoldenBrv,
        CodeVariant::GoldenWimax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CodeVariant::GoldenDv => "golden-dv",
            CodeVariant::GoldenBrv => "golden-brv",
            CodeVariant::GoldenWimax => "golden-wimax",
            CodeVariant::OverlaidAlamouti => "overlaid-alamouti",
        }
    }

    pub fn is_golden(self) -> bool {
        !matches!(self, CodeVariant::OverlaidAlamouti)
    }

    /// Which stacked receive samples are conjugated.
    pub fn receive_conjugation(self) -> [bool; 4] {
        match self {
            CodeVariant::OverlaidAlamouti => [false, true, false, true],
            _ => [false; 4],
        }
    }
}

impl fmt::Display for CodeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodeVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "golden-dv" | "dv" => Ok(CodeVariant::GoldenDv),
            "golden-brv" | "brv" => Ok(CodeVariant::GoldenBrv),
            "golden-wimax" | "wimax" => Ok(CodeVariant::GoldenWimax),
            "overlaid-alamouti" | "alamouti" => Ok(CodeVariant::OverlaidAlamouti),
            other => Err(format!("unknown code '{other}'")),
        }
    }
}

/// A 2x2 codeword; `entries[k][i]` is the symbol sent from antenna `i` in
/// time slot `k` (both zero-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codeword {
    pub entries: [[Complex64; 2]; 2],
}

impl Codeword {
    pub fn zero() -> Self {
        Self {
            entries: [[Complex64::new(0.0, 0.0); 2]; 2],
        }
    }

    pub fn det(&self) -> Complex64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.entries.iter().flatten().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_finite())
    }
}

/// Dayal-Varanasi golden code: `diag(M a) + φ·antidiag(M b)`.
pub fn encode_golden_dv(x: &[Complex64; 4]) -> Codeword {
    let g = GoldenConstants::new();
    let (a1, a2) = g.rotate(x[0], x[1]);
    let (b1, b2) = g.rotate(x[2], x[3]);
    Codeword {
        entries: [[a1, g.phi * b1], [g.phi * b2, a2]],
    }
}

/// Belfiore-Rekaya-Viterbo or WiMAX golden code, in the symbol order whose
/// effective channel is [`effective_channel`]'s for that variant.
///
/// Panics if `variant` is not one of those two.
pub fn encode_golden_variant(x: &[Complex64; 4], variant: CodeVariant) -> Codeword {
    let g = GoldenConstants::new();
    let (a1, a2) = g.rotate(x[0], x[1]);
    let (b1, b2) = g.rotate(x[2], x[3]);
    let j = Complex64::new(0.0, 1.0);
    match variant {
        CodeVariant::GoldenBrv => {
            let alpha = Complex64::new(g.c, -g.s);
            let beta = Complex64::new(g.s, g.c);
            Codeword {
                entries: [[alpha * a1, alpha * b1], [j * beta * b2, beta * a2]],
            }
        }
        CodeVariant::GoldenWimax => Codeword {
            entries: [[a1, b1], [-b2, -j * a2]],
        },
        other => panic!("encode_golden_variant called with {other}"),
    }
}

/// Overlaid Alamouti code: `(Alamouti(x1, x2) + diag(1, -1)·Alamouti(u1, u2)) / √2`.
pub fn encode_overlaid_alamouti(x: &[Complex64; 4]) -> Codeword {
    let k = std::f64::consts::FRAC_1_SQRT_2;
    let (u1, u2) = AlamoutiConstants::new().u(x[2], x[3]);
    Codeword {
        entries: [
            [(x[0] + u1) * k, (x[1] + u2) * k],
            [(-x[1].conj() + u2.conj()) * k, (x[0].conj() - u1.conj()) * k],
        ],
    }
}

/// Encodes `x` with any supported code.
pub fn encode(variant: CodeVariant, x: &[Complex64; 4]) -> Codeword {
    match variant {
        CodeVariant::GoldenDv => encode_golden_dv(x),
        CodeVariant::GoldenBrv | CodeVariant::GoldenWimax => encode_golden_variant(x, variant),
        CodeVariant::OverlaidAlamouti => encode_overlaid_alamouti(x),
    }
}

/// The effective channel seen by the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub h: ComplexMat,
    /// Stacked receive samples that are conjugated before decoding.
    pub receive_conjugation: [bool; 4],
    pub variant: CodeVariant,
    /// `(H̄, Ψ)` with `h = H̄·Ψ`, for golden variants built from a realization.
    pub factors: Option<(ComplexMat, ComplexMat)>,
}

impl EffectiveChannel {
    /// Stacking order of the receive vector as zero-based `(rx antenna, time)`.
    pub const STACKING: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

    /// Wraps an explicit 4x4 matrix (no factorization available).
    pub fn from_matrix(h: ComplexMat, variant: CodeVariant) -> Self {
        Self {
            h,
            receive_conjugation: variant.receive_conjugation(),
            variant,
            factors: None,
        }
    }

    /// `‖y − H x‖²`.
    pub fn cost(&self, y: &[Complex64; 4], x: &[Complex64; 4]) -> f64 {
        let hx = self.h.mul_vec(x);
        y.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum()
    }

    /// `H x + ñ` where `ñ` is `noise` stacked under the conjugation map.
    pub fn apply(&self, x: &[Complex64; 4], noise: &[Complex64; 4]) -> [Complex64; 4] {
        let hx = self.h.mul_vec(x);
        let mut y = [Complex64::new(0.0, 0.0); 4];
        for p in 0..4 {
            let n = if self.receive_conjugation[p] {
                noise[p].conj()
            } else {
                noise[p]
            };
            y[p] = hx[p] + n;
        }
        y
    }
}

/// Builds the effective channel of `variant` for the realization `ch`.
pub fn effective_channel(ch: &ChannelRealization, variant: CodeVariant) -> EffectiveChannel {
    let g = GoldenConstants::new();
    let z = Complex64::new(0.0, 0.0);
    let j = Complex64::new(0.0, 1.0);
    // h(i, rx, k) with zero-based transmit antenna, receive antenna and slot
    let h = |i, r, k| ch.coefficient(i, r, k);
    let golden = |h_bar: ComplexMat| {
        let psi = g.psi();
        EffectiveChannel {
            h: h_bar * psi,
            receive_conjugation: [false; 4],
            variant,
            factors: Some((h_bar, psi)),
        }
    };
    match variant {
        CodeVariant::GoldenDv => {
            let p = g.phi;
            golden(ComplexMat::from_rows(&[
                [h(0, 0, 0), z, p * h(1, 0, 0), z],
                [z, h(1, 0, 1), z, p * h(0, 0, 1)],
                [h(0, 1, 0), z, p * h(1, 1, 0), z],
                [z, h(1, 1, 1), z, p * h(0, 1, 1)],
            ]))
        }
        CodeVariant::GoldenBrv => {
            let alpha = Complex64::new(g.c, -g.s);
            let beta = Complex64::new(g.s, g.c);
            golden(ComplexMat::from_rows(&[
                [h(0, 0, 0) * alpha, z, h(1, 0, 0) * alpha, z],
                [z, h(1, 0, 1) * beta, z, j * h(0, 0, 1) * beta],
                [h(0, 1, 0) * alpha, z, h(1, 1, 0) * alpha, z],
                [z, h(1, 1, 1) * beta, z, j * h(0, 1, 1) * beta],
            ]))
        }
        CodeVariant::GoldenWimax => golden(ComplexMat::from_rows(&[
            [h(0, 0, 0), z, h(1, 0, 0), z],
            [z, -j * h(1, 0, 1), z, -h(0, 0, 1)],
            [h(0, 1, 0), z, h(1, 1, 0), z],
            [z, -j * h(1, 1, 1), z, -h(0, 1, 1)],
        ])),
        CodeVariant::OverlaidAlamouti => {
            let ac = AlamoutiConstants::new();
            let (p1, p2) = (ac.phi1, ac.phi2);
            let k = std::f64::consts::FRAC_1_SQRT_2;
            let mut rows = [[z; 4]; 4];
            for r in 0..2 {
                let (a, b) = (h(0, r, 0), h(1, r, 0));
                let (a2, b2) = (h(0, r, 1).conj(), h(1, r, 1).conj());
                rows[2 * r] = [a, b, p1 * a - p2.conj() * b, p2 * a + p1.conj() * b];
                rows[2 * r + 1] = [b2, -a2, -p2.conj() * a2 - p1 * b2, p1.conj() * a2 - p2 * b2];
            }
            EffectiveChannel {
                h: ComplexMat::from_rows(&rows).scale(Complex64::new(k, 0.0)),
                receive_conjugation: variant.receive_conjugation(),
                variant,
                factors: None,
            }
        }
    }
}

/// Sends `cw` through `ch` and stacks the received samples for `variant`.
///
/// `noise` is indexed in stacking order `[n1[1], n1[2], n2[1], n2[2]]` and is
/// conjugated together with the sample it corrupts.
pub fn transmit(
    cw: &Codeword,
    ch: &ChannelRealization,
    noise: &[Complex64; 4],
    variant: CodeVariant,
) -> [Complex64; 4] {
    let conj = variant.receive_conjugation();
    let mut y = [Complex64::new(0.0, 0.0); 4];
    for (p, &(r, k)) in EffectiveChannel::STACKING.iter().enumerate() {
        let sample: Complex64 = (0..2)
            .map(|i| cw.entries[k][i] * ch.coefficient(i, r, k))
            .sum::<Complex64>()
            + noise[p];
        y[p] = if conj[p] { sample.conj() } else { sample };
    }
    y
}
