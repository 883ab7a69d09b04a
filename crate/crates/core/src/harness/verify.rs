//! Property-verification suites.
//!
//! Each suite runs a batch of randomized checks and records, per assertion,
//! the extremal measured value, the threshold it is held to and the verdict.
//! Failures are report content; the suites themselves do not error.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{sample_channel, sample_noise, snr_to_n0, stream_rng, ChannelModel};
use crate::codes::{effective_channel, encode, CodeVariant, EffectiveChannel, GoldenConstants};
use crate::constellation::{make_qam, QamAlphabet};
use crate::decoders::{
    decode_alamouti_fast, decode_exhaustive, decode_fast_golden, decode_sphere_conventional,
    fast_blast_ordering, Ordering, Permutation, SearchOptions,
};
use crate::error::StcError;
use crate::matrixkit::{inner_product_columns, qr_appendix_a, qr_decompose, ComplexMat};

/// Channel models every golden-code suite is run under.
pub const SUITE_MODELS: [ChannelModel; 3] = [
    ChannelModel::Quasistatic,
    ChannelModel::Rapid,
    ChannelModel::Markov(0.9),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Theorem1,
    MlEquiv,
    Sorts,
    Alamouti,
    MinDet,
    QrAgree,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Theorem1,
        Suite::MlEquiv,
        Suite::Sorts,
        Suite::Alamouti,
        Suite::MinDet,
        Suite::QrAgree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::MlEquiv => "mlequiv",
            Suite::Sorts => "sorts",
            Suite::Alamouti => "alamouti",
            Suite::MinDet => "mindet",
            Suite::QrAgree => "qr-agree",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

/// How a measured value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    Above,
    AtLeast,
}

impl Relation {
    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => measured <= threshold,
            Relation::Above => measured > threshold,
            Relation::AtLeast => measured >= threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Above => ">",
            Relation::AtLeast => ">=",
        }
    }
}

/// One assertion of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation,
            threshold,
            // NaN never passes
            passed: relation.holds(measured, threshold),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {:.6e} {} {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.relation.symbol(),
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite {} (trials {}, seed {})",
            self.suite, self.trials, self.seed
        )?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Runs `suite` with `trials` random instances per configuration.
pub fn run_verification(suite: Suite, trials: usize, seed: u64) -> VerificationReport {
    let trials = trials.max(1);
    let checks = match suite {
        Suite::Theorem1 => theorem1(trials, seed),
        Suite::MlEquiv => ml_equivalence(trials, seed),
        Suite::Sorts => sort_counts(trials, seed),
        Suite::Alamouti => alamouti_structure(trials, seed),
        Suite::MinDet => vec![min_det_equality()],
        Suite::QrAgree => qr_agreement(trials, seed),
    };
    VerificationReport {
        suite,
        trials,
        seed,
        checks,
    }
}

/// Separate generator stream per (configuration, trial).
fn instance_rng(seed: u64, config: u64, trial: usize) -> rand_chacha::ChaCha20Rng {
    stream_rng(seed, (config << 40) | trial as u64)
}

fn golden_channel(seed: u64, config: u64, trial: usize, model: ChannelModel, v: CodeVariant) -> Option<EffectiveChannel> {
    let ch = sample_channel(&mut instance_rng(seed, config, trial), model).ok()?;
    Some(effective_channel(&ch, v))
}

/// `|Im r12|/‖H‖` and `|Im r34|/‖H‖` under the general QR, and the largest
/// imaginary magnitude in the A and D blocks of the structured QR.
pub fn theorem1_measure(eff: &EffectiveChannel) -> Option<(f64, f64, f64)> {
    let norm = eff.h.frobenius_norm();
    let qr = qr_decompose(&eff.h).ok()?;
    let (h_bar, psi) = eff.factors.as_ref()?;
    let structured = qr_appendix_a(h_bar, psi).ok()?;
    let exact = [structured.a_block(), structured.d_block()]
        .iter()
        .flat_map(|b| b.entries())
        .map(|v| v.im.abs())
        .fold(0.0, f64::max);
    Some((
        qr.r[(0, 1)].im.abs() / norm,
        qr.r[(2, 3)].im.abs() / norm,
        exact,
    ))
}

/// Closed form `(|h11[1]|² + |h12[1]|² − |h21[2]|² − |h22[2]|²)/√5` for the
/// inner product of the first two columns of the Dayal-Varanasi matrix.
pub fn dv_first_columns_closed_form(coefficient: impl Fn(usize, usize, usize) -> Complex64) -> f64 {
    let g = GoldenConstants::new();
    let sum = coefficient(0, 0, 0).norm_sqr() + coefficient(0, 1, 0).norm_sqr()
        - coefficient(1, 0, 1).norm_sqr()
        - coefficient(1, 1, 1).norm_sqr();
    g.c * g.s * sum
}

fn theorem1(trials: usize, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    for (mi, &model) in SUITE_MODELS.iter().enumerate() {
        for (vi, &v) in CodeVariant::GOLDEN.iter().enumerate() {
            let config = (mi * 3 + vi) as u64;
            let (mut r12, mut r34, mut exact, mut failures) = (0.0f64, 0.0f64, 0.0f64, 0usize);
            for t in 0..trials {
                match golden_channel(seed, config, t, model, v).as_ref().and_then(theorem1_measure) {
                    Some((a, b, e)) => {
                        r12 = r12.max(a);
                        r34 = r34.max(b);
                        exact = exact.max(e);
                    }
                    None => failures += 1,
                }
            }
            let tag = format!("{v}/{model}");
            checks.push(Check::new(format!("{tag} max|Im r12|/|H|"), r12, Relation::AtMost, 1e-9));
            checks.push(Check::new(format!("{tag} max|Im r34|/|H|"), r34, Relation::AtMost, 1e-9));
            checks.push(Check::new(format!("{tag} structured max|Im A,D|"), exact, Relation::AtMost, 0.0));
            checks.push(Check::new(format!("{tag} degenerate draws"), failures as f64, Relation::AtMost, 0.0));
        }
    }
    checks.push(eq8_check(trials, seed));
    checks
}

/// Relative error of the closed form against the direct inner product.
fn eq8_check(trials: usize, seed: u64) -> Check {
    let mut worst = 0.0f64;
    for t in 0..trials {
        let ch = match sample_channel(&mut instance_rng(seed, 100, t), ChannelModel::Rapid) {
            Ok(ch) => ch,
            Err(_) => return Check::new("eq8 relative error", f64::NAN, Relation::AtMost, 1e-12),
        };
        let eff = effective_channel(&ch, CodeVariant::GoldenDv);
        let direct = inner_product_columns(&eff.h, 0, 1);
        let closed = dv_first_columns_closed_form(|i, r, k| ch.coefficient(i, r, k));
        // relative to the size of the terms being cancelled
        let g = GoldenConstants::new();
        let scale = g.c * g.s
            * [(0, 0, 0), (0, 1, 0), (1, 0, 1), (1, 1, 1)]
                .iter()
                .map(|&(i, r, k)| ch.coefficient(i, r, k).norm_sqr())
                .sum::<f64>();
        worst = worst.max((direct - Complex64::new(closed, 0.0)).norm() / scale);
    }
    Check::new("eq8 relative error", worst, Relation::AtMost, 1e-12)
}

/// Worst cost gap to the exhaustive oracle for each applicable fast decoder.
#[derive(Default)]
struct Gaps {
    fast: f64,
    fast_blast: f64,
    sphere: f64,
    sphere_blast: f64,
    alamouti: f64,
    failures: usize,
}

fn random_instance(
    rng: &mut impl Rng,
    model: ChannelModel,
    variant: CodeVariant,
    alphabet: &QamAlphabet,
    snr_db: f64,
) -> Option<(EffectiveChannel, [Complex64; 4])> {
    let ch = sample_channel(rng, model).ok()?;
    let x: [Complex64; 4] = std::array::from_fn(|_| alphabet.symbol(rng.random_range(0..alphabet.order())));
    let noise = sample_noise(rng, snr_to_n0(snr_db));
    let y = crate::codes::transmit(&encode(variant, &x), &ch, &noise, variant);
    Some((effective_channel(&ch, variant), y))
}

fn ml_equivalence(trials: usize, seed: u64) -> Vec<Check> {
    let opts = SearchOptions::default();
    let mut checks = Vec::new();
    let cases = [
        (CodeVariant::GoldenDv, ChannelModel::Quasistatic),
        (CodeVariant::GoldenDv, ChannelModel::Rapid),
        (CodeVariant::GoldenBrv, ChannelModel::Markov(0.9)),
        (CodeVariant::GoldenWimax, ChannelModel::Rapid),
        (CodeVariant::OverlaidAlamouti, ChannelModel::Quasistatic),
    ];
    for (m, n) in [(4usize, trials), (16, (trials / 10).max(1))] {
        let alphabet = make_qam(m).expect("supported order");
        for (ci, &(variant, model)) in cases.iter().enumerate() {
            let mut gaps = Gaps::default();
            for (si, snr) in [0.0, 10.0, 20.0].into_iter().enumerate() {
                for t in 0..n {
                    let config = (m as u64) << 8 | (ci as u64) << 4 | si as u64;
                    let mut rng = instance_rng(seed, config, t);
                    let Some((eff, y)) = random_instance(&mut rng, model, variant, &alphabet, snr) else {
                        gaps.failures += 1;
                        continue;
                    };
                    if accumulate_gaps(&eff, &y, &alphabet, opts, &mut gaps).is_err() {
                        gaps.failures += 1;
                    }
                }
            }
            let tag = format!("M={m} {variant}/{model}");
            let mut push = |what: &str, v: f64| {
                checks.push(Check::new(format!("{tag} {what} max cost gap"), v, Relation::AtMost, 1e-9))
            };
            if variant.is_golden() {
                push("fast", gaps.fast);
                push("fast+blast", gaps.fast_blast);
            } else {
                push("alamouti-fast", gaps.alamouti);
            }
            push("sphere", gaps.sphere);
            push("sphere+blast", gaps.sphere_blast);
            checks.push(Check::new(
                format!("{tag} decoder errors"),
                gaps.failures as f64,
                Relation::AtMost,
                0.0,
            ));
        }
    }
    checks
}

fn accumulate_gaps(
    eff: &EffectiveChannel,
    y: &[Complex64; 4],
    alphabet: &QamAlphabet,
    opts: SearchOptions,
    gaps: &mut Gaps,
) -> crate::Result<()> {
    let oracle = decode_exhaustive(eff, y, alphabet)?.cost;
    let gap = |c: f64| (c - oracle).abs();
    if eff.variant.is_golden() {
        let r = decode_fast_golden(eff, y, alphabet, Permutation::IDENTITY, opts)?;
        gaps.fast = gaps.fast.max(gap(r.cost));
        let perm = fast_blast_ordering(&eff.h)?;
        let r = decode_fast_golden(eff, y, alphabet, perm, opts)?;
        gaps.fast_blast = gaps.fast_blast.max(gap(r.cost));
    } else {
        let r = decode_alamouti_fast(eff, y, alphabet, opts)?;
        gaps.alamouti = gaps.alamouti.max(gap(r.cost));
    }
    let r = decode_sphere_conventional(eff, y, alphabet, Ordering::None, opts)?;
    gaps.sphere = gaps.sphere.max(gap(r.cost));
    let r = decode_sphere_conventional(eff, y, alphabet, Ordering::Blast, opts)?;
    gaps.sphere_blast = gaps.sphere_blast.max(gap(r.cost));
    Ok(())
}

fn sort_counts(trials: usize, seed: u64) -> Vec<Check> {
    let opts = SearchOptions::default();
    let mut checks = Vec::new();
    for m in [4usize, 16, 64] {
        let alphabet = make_qam(m).expect("supported order");
        let (mut fast_ok, mut sphere_many, mut total) = (0usize, 0usize, 0usize);
        for t in 0..trials {
            let mut rng = instance_rng(seed, 200 + m as u64, t);
            let model = SUITE_MODELS[t % SUITE_MODELS.len()];
            let snr = rng.random_range(0.0..30.0);
            let Some((eff, y)) = random_instance(&mut rng, model, CodeVariant::GoldenDv, &alphabet, snr) else {
                continue;
            };
            let fast = decode_fast_golden(&eff, &y, &alphabet, Permutation::IDENTITY, opts);
            let sphere = decode_sphere_conventional(&eff, &y, &alphabet, Ordering::None, opts);
            if let (Ok(f), Ok(s)) = (fast, sphere) {
                total += 1;
                fast_ok += usize::from(f.full_sorts == 2);
                sphere_many += usize::from(s.full_sorts > 2);
            }
        }
        let frac = |k: usize| if total == 0 { f64::NAN } else { k as f64 / total as f64 };
        checks.push(Check::new(
            format!("M={m} fraction of fast decodes with 2 sorts"),
            frac(fast_ok),
            Relation::AtLeast,
            1.0,
        ));
        if m == 64 {
            checks.push(Check::new(
                format!("M={m} fraction of sphere decodes with >2 sorts"),
                frac(sphere_many),
                Relation::Above,
                0.0,
            ));
        }
    }
    checks
}

fn alamouti_structure(trials: usize, seed: u64) -> Vec<Check> {
    let alphabet = make_qam(4).expect("supported order");
    let y = [Complex64::new(0.0, 0.0); 4];
    let mut quasi = 0.0f64;
    let mut rapid = Vec::with_capacity(trials);
    let mut rejected = 0usize;
    for t in 0..trials {
        for (config, model) in [(300, ChannelModel::Quasistatic), (301, ChannelModel::Rapid)] {
            let Ok(ch) = sample_channel(&mut instance_rng(seed, config, t), model) else {
                continue;
            };
            let eff = effective_channel(&ch, CodeVariant::OverlaidAlamouti);
            let Ok(qr) = qr_decompose(&eff.h) else { continue };
            let norm = eff.h.frobenius_norm();
            let off = qr.r[(0, 1)].norm().max(qr.r[(2, 3)].norm()) / norm;
            if model.is_static() {
                quasi = quasi.max(off);
            } else {
                rapid.push(qr.r[(0, 1)].norm() / norm);
                let refused = matches!(
                    decode_alamouti_fast(&eff, &y, &alphabet, SearchOptions::default()),
                    Err(StcError::AlamoutiStructure(_))
                );
                rejected += usize::from(refused);
            }
        }
    }
    rapid.sort_by(f64::total_cmp);
    let median = if rapid.is_empty() {
        f64::NAN
    } else {
        let n = rapid.len();
        if n % 2 == 1 {
            rapid[n / 2]
        } else {
            0.5 * (rapid[n / 2 - 1] + rapid[n / 2])
        }
    };
    let frac = if rapid.is_empty() {
        f64::NAN
    } else {
        rejected as f64 / rapid.len() as f64
    };
    vec![
        Check::new("quasistatic max(|r12|,|r34|)/|H|", quasi, Relation::AtMost, 1e-9),
        Check::new("rapid median |r12|/|H|", median, Relation::Above, 0.01),
        Check::new("rapid fraction rejected by alamouti-fast", frac, Relation::AtLeast, 1.0),
    ]
}

/// Minimum `|det C(d)|` over nonzero difference vectors `d` of the unscaled
/// `order`-QAM grid, for the Dayal-Varanasi code.
pub fn min_det_unscaled(order: usize) -> f64 {
    let side = (order as f64).sqrt().round() as i64;
    // differences of odd integers in [-(side-1), side-1]: even values
    let axis: Vec<f64> = (-(side - 1)..=side - 1).map(|k| 2.0 * k as f64).collect();
    let values: Vec<Complex64> = axis
        .iter()
        .flat_map(|&re| axis.iter().map(move |&im| Complex64::new(re, im)))
        .collect();
    let n = values.len();
    let mut best = f64::INFINITY;
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let d = [values[i0], values[i1], values[i2], values[i3]];
                    if d.iter().all(|v| v.norm_sqr() == 0.0) {
                        continue;
                    }
                    best = best.min(encode(CodeVariant::GoldenDv, &d).det().norm());
                }
            }
        }
    }
    best
}

fn min_det_equality() -> Check {
    let small = min_det_unscaled(4);
    let large = min_det_unscaled(16);
    Check::new(
        "min|det| relative difference, 4-QAM vs 16-QAM",
        (small - large).abs() / small.max(large),
        Relation::AtMost,
        1e-9,
    )
}

fn max_entry_gap(a: &ComplexMat, b: &ComplexMat) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn qr_agreement(trials: usize, seed: u64) -> Vec<Check> {
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    for t in 0..trials {
        let model = SUITE_MODELS[t % SUITE_MODELS.len()];
        let variant = CodeVariant::GOLDEN[(t / SUITE_MODELS.len()) % CodeVariant::GOLDEN.len()];
        let Some(eff) = golden_channel(seed, 400, t, model, variant) else {
            failures += 1;
            continue;
        };
        let (h_bar, psi) = eff.factors.as_ref().expect("golden channels carry factors");
        match (qr_decompose(&eff.h), qr_appendix_a(h_bar, psi)) {
            (Ok(a), Ok(b)) => {
                worst = worst.max(max_entry_gap(&a.q, &b.q)).max(max_entry_gap(&a.r, &b.r));
            }
            _ => failures += 1,
        }
    }
    vec![
        Check::new("max entrywise |QR - QR_structured|", worst, Relation::AtMost, 1e-9),
        Check::new("degenerate draws", failures as f64, Relation::AtMost, 0.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>(), Ok(s));
        }
        assert!("theorem2".parse::<Suite>().is_err());
    }

    #[test]
    fn check_verdicts() {
        assert!(Check::new("a", 1e-10, Relation::AtMost, 1e-9).passed);
        assert!(!Check::new("a", f64::NAN, Relation::AtMost, 1e-9).passed);
        assert!(!Check::new("a", 0.0, Relation::Above, 0.0).passed);
        assert!(Check::new("a", 1.0, Relation::AtLeast, 1.0).passed);
    }

    #[test]
    fn closed_form_example() {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        // h11[1] = h12[1] = 1, h21[2] = 2, h22[2] = 0; the rest arbitrary
        let mut coeff = [[[Complex64::new(0.3, -0.7); 2]; 2]; 2];
        coeff[0][0][0] = one;
        coeff[0][1][0] = one;
        coeff[1][0][1] = 2.0 * one;
        coeff[1][1][1] = z;
        let ch = ChannelRealization::new(coeff, ChannelModel::Rapid);
        let eff = effective_channel(&ch, CodeVariant::GoldenDv);
        let direct = inner_product_columns(&eff.h, 0, 1);
        let expected = -2.0 / 5f64.sqrt();
        assert!((direct - Complex64::new(expected, 0.0)).norm() < 1e-12);
        let closed = dv_first_columns_closed_form(|i, r, k| ch.coefficient(i, r, k));
        assert!((closed - expected).abs() < 1e-15);
    }

    #[test]
    fn small_suites_pass() {
        for suite in [Suite::Theorem1, Suite::Alamouti, Suite::QrAgree, Suite::Sorts] {
            let rep = run_verification(suite, 60, 3);
            assert!(rep.passed(), "{rep}");
        }
    }

    #[test]
    fn ml_equivalence_small() {
        let rep = run_verification(Suite::MlEquiv, 20, 4);
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn min_det_of_four_qam() {
        // brute force over the 9⁴ − 1 differences, independently of the encoder:
        // det = a1 a2 − φ² b1 b2 with a = M(d1, d2), b = M(d3, d4)
        let g = GoldenConstants::new();
        let vals = [-2.0, 0.0, 2.0];
        let cvals: Vec<Complex64> = vals
            .iter()
            .flat_map(|&r| vals.iter().map(move |&i| Complex64::new(r, i)))
            .collect();
        let mut best = f64::INFINITY;
        for &d1 in &cvals {
            for &d2 in &cvals {
                for &d3 in &cvals {
                    for &d4 in &cvals {
                        if [d1, d2, d3, d4].iter().all(|v| v.norm() == 0.0) {
                            continue;
                        }
                        let a1 = g.c * d1 + g.s * d2;
                        let a2 = -g.s * d1 + g.c * d2;
                        let b1 = g.c * d3 + g.s * d4;
                        let b2 = -g.s * d3 + g.c * d4;
                        best = best.min((a1 * a2 - g.phi * g.phi * b1 * b2).norm());
                    }
                }
            }
        }
        assert!((min_det_unscaled(4) - best).abs() < 1e-12);
    }
}
