//! Square QAM and PAM alphabets.
//!
//! A square `M`-QAM alphabet is the Cartesian product of one `√M`-PAM
//! alphabet with itself, so every QAM decision splits into two independent
//! PAM decisions. The fast golden decoder relies on that separability.
//!
//! Symbol ordering is fixed: index `k = im_index * √M + re_index`, i.e.
//! row-major over the (imaginary, real) grid with the real axis fastest.

use num_complex::Complex64;

use crate::error::{Result, StcError};

/// Modulation orders with a square QAM alphabet.
pub const SUPPORTED_ORDERS: [usize; 4] = [4, 16, 64, 256];

/// A `√M`-ary PAM alphabet on the odd-integer grid, times a positive scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PamAlphabet {
    levels: Vec<f64>,
    scale: f64,
}

impl PamAlphabet {
    /// Odd-integer levels `-(L-1), ..., -1, 1, ..., L-1` multiplied by `scale`.
    pub fn new(size: usize, scale: f64) -> Self {
        assert!(size >= 1, "PAM alphabet must be nonempty");
        assert!(scale > 0.0 && scale.is_finite(), "PAM scale must be positive");
        let levels = (0..size)
            .map(|i| (2 * i) as f64 - (size as f64 - 1.0))
            .collect();
        Self { levels, scale }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Unscaled odd-integer levels.
    pub fn raw_levels(&self) -> &[f64] {
        &self.levels
    }

    /// Scaled level at `index`.
    #[inline]
    pub fn level(&self, index: usize) -> f64 {
        self.scale * self.levels[index]
    }

    /// Nearest level to `x` by rounding and clamping; no scan over the levels.
    ///
    /// An exact midpoint between two levels resolves to the lower one.
    #[inline]
    pub fn slice(&self, x: f64) -> (f64, usize) {
        let top = self.levels.len() - 1;
        // position of x on the level grid, with levels at integer positions
        let t = 0.5 * (x / self.scale + top as f64);
        let idx = (t - 0.5).ceil().clamp(0.0, top as f64) as usize;
        (self.level(idx), idx)
    }

    /// Levels in ascending order of distance to `x`, produced lazily.
    pub fn sorted_list(&self, x: f64) -> PamList<'_> {
        let (_, start) = self.slice(x);
        PamList {
            pam: self,
            x,
            lo: start as isize,
            hi: start as isize,
            started: false,
        }
    }
}

/// `slice_pam(x, A)`: the PAM slicer.
pub fn slice_pam(x: f64, alphabet: &PamAlphabet) -> (f64, usize) {
    alphabet.slice(x)
}

/// `sorted_pam_list(x, A)`: Schnorr-Euchner ordered candidates.
pub fn sorted_pam_list(x: f64, alphabet: &PamAlphabet) -> PamList<'_> {
    alphabet.sorted_list(x)
}

/// Zigzag expansion outward from the sliced level.
///
/// Each step compares the next unvisited level below and above and emits
/// the closer one (the lower one on a tie), so the distance sequence is
/// nondecreasing without ever sorting.
#[derive(Debug, Clone)]
pub struct PamList<'a> {
    pam: &'a PamAlphabet,
    x: f64,
    lo: isize,
    hi: isize,
    started: bool,
}

impl Iterator for PamList<'_> {
    type Item = (f64, usize);

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            let idx = self.lo as usize;
            return Some((self.pam.level(idx), idx));
        }
        let below = self.lo - 1;
        let above = self.hi + 1;
        let has_below = below >= 0;
        let has_above = (above as usize) < self.pam.len();
        let take_below = match (has_below, has_above) {
            (false, false) => return None,
            (true, false) => true,
            (false, true) => false,
            (true, true) => {
                let d_below = (self.x - self.pam.level(below as usize)).abs();
                let d_above = (self.pam.level(above as usize) - self.x).abs();
                d_below <= d_above
            }
        };
        let idx = if take_below {
            self.lo = below;
            below as usize
        } else {
            self.hi = above;
            above as usize
        };
        Some((self.pam.level(idx), idx))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let remaining = if self.started {
            self.pam.len() - (self.hi - self.lo + 1) as usize
        } else {
            self.pam.len()
        };
        (remaining, Some(remaining))
    }
}

impl ExactSizeIterator for PamList<'_> {}

/// Square QAM alphabet built from a shared PAM alphabet on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct QamAlphabet {
    pam: PamAlphabet,
    symbols: Vec<Complex64>,
}

impl QamAlphabet {
    /// Square QAM with an explicit scale.
    pub fn with_scale(order: usize, scale: f64) -> Result<Self> {
        if !SUPPORTED_ORDERS.contains(&order) {
            return Err(StcError::UnsupportedModulation(order));
        }
        let side = (order as f64).sqrt().round() as usize;
        let pam = PamAlphabet::new(side, scale);
        let mut symbols = Vec::with_capacity(order);
        for im in 0..side {
            for re in 0..side {
                symbols.push(Complex64::new(pam.level(re), pam.level(im)));
            }
        }
        Ok(Self { pam, symbols })
    }

    /// Square QAM on the odd-integer grid (scale 1).
    pub fn unscaled(order: usize) -> Result<Self> {
        Self::with_scale(order, 1.0)
    }

    pub fn order(&self) -> usize {
        self.symbols.len()
    }

    pub fn side(&self) -> usize {
        self.pam.len()
    }

    pub fn scale(&self) -> f64 {
        self.pam.scale()
    }

    pub fn pam(&self) -> &PamAlphabet {
        &self.pam
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    #[inline]
    pub fn symbol(&self, index: usize) -> Complex64 {
        self.symbols[index]
    }

    /// Index of the symbol with the given per-axis PAM indices.
    #[inline]
    pub fn index_of(&self, re_index: usize, im_index: usize) -> usize {
        im_index * self.side() + re_index
    }

    /// Per-axis PAM indices `(re, im)` of symbol `index`.
    #[inline]
    pub fn axes_of(&self, index: usize) -> (usize, usize) {
        (index % self.side(), index / self.side())
    }

    /// Nearest symbol by two independent PAM slices.
    #[inline]
    pub fn slice(&self, x: Complex64) -> (Complex64, usize) {
        let (re, i_re) = self.pam.slice(x.re);
        let (im, i_im) = self.pam.slice(x.im);
        (Complex64::new(re, im), self.index_of(i_re, i_im))
    }

    /// Mean symbol energy over the alphabet.
    pub fn mean_energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Index of `symbol` if it is exactly an alphabet member.
    pub fn position(&self, symbol: Complex64) -> Option<usize> {
        self.symbols.iter().position(|&s| s == symbol)
    }
}

/// `make_qam(M)`: unit-average-energy square QAM.
pub fn make_qam(order: usize) -> Result<QamAlphabet> {
    if !SUPPORTED_ORDERS.contains(&order) {
        return Err(StcError::UnsupportedModulation(order));
    }
    // mean of a^2 + b^2 over the odd-integer grid is 2(M-1)/3
    let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
    QamAlphabet::with_scale(order, scale)
}

/// Stable ascending sort of the whole alphabet by `metric`.
///
/// Returns the index permutation and the metric values in that order.
pub fn sort_alphabet_by_metric<F>(alphabet: &QamAlphabet, metric: F) -> (Vec<usize>, Vec<f64>)
where
    F: Fn(Complex64) -> f64,
{
    let mut keyed: Vec<(usize, f64)> = alphabet
        .symbols()
        .iter()
        .enumerate()
        .map(|(i, &s)| (i, metric(s)))
        .collect();
    keyed.sort_by(|a, b| a.1.total_cmp(&b.1));
    keyed.into_iter().unzip()
}
