//! Monte Carlo sweeps over SNR.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{
    sample_channel, sample_noise, snr_to_n0, stream_rng, ChannelModel,
};
use crate::codes::{effective_channel, encode, transmit, CodeVariant};
use crate::constellation::{make_qam, QamAlphabet, SUPPORTED_ORDERS};
use crate::decoders::{decode, DecoderKind, Ordering, SearchOptions};
use crate::error::{Result, StcError};

/// Everything that determines a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub code: CodeVariant,
    pub decoders: Vec<DecoderKind>,
    pub modulation: usize,
    pub channel: ChannelModel,
    pub snr_start: f64,
    pub snr_stop: f64,
    pub snr_step: f64,
    pub trials: usize,
    pub seed: u64,
    pub ordering: Ordering,
    /// Skip the noise entirely (SNR only labels the rows).
    pub noiseless: bool,
    /// Worker threads; `None` uses the machine's parallelism.
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            code: CodeVariant::GoldenDv,
            decoders: vec![DecoderKind::Fast, DecoderKind::Sphere],
            modulation: 16,
            channel: ChannelModel::Quasistatic,
            snr_start: 0.0,
            snr_stop: 30.0,
            snr_step: 2.0,
            trials: 10_000,
            seed: 1,
            ordering: Ordering::None,
            noiseless: false,
            threads: None,
        }
    }
}

impl SweepConfig {
    /// SNR grid `start, start + step, ...` up to and including `stop`.
    pub fn snr_points(&self) -> Vec<f64> {
        let n = ((self.snr_stop - self.snr_start) / self.snr_step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| self.snr_start + i as f64 * self.snr_step)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(StcError::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.snr_step > 0.0) || !self.snr_step.is_finite() {
            return bad(format!("snr step must be positive, got {}", self.snr_step));
        }
        if !self.snr_start.is_finite() || !self.snr_stop.is_finite() || self.snr_stop < self.snr_start
        {
            return bad(format!(
                "snr range [{}, {}] is empty or not finite",
                self.snr_start, self.snr_stop
            ));
        }
        if !SUPPORTED_ORDERS.contains(&self.modulation) {
            return Err(StcError::UnsupportedModulation(self.modulation));
        }
        self.channel.validate()?;
        if self.decoders.is_empty() {
            return bad("no decoder selected".into());
        }
        let mut sorted = self.decoders.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.decoders.len() {
            return bad("decoder selected twice".into());
        }
        for &d in &self.decoders {
            match d {
                DecoderKind::Fast if !self.code.is_golden() => {
                    return bad(format!("decoder 'fast' requires a golden code, not {}", self.code));
                }
                DecoderKind::AlamoutiFast if self.code != CodeVariant::OverlaidAlamouti => {
                    return bad(format!("decoder 'alamouti-fast' requires overlaid-alamouti, not {}", self.code));
                }
                DecoderKind::AlamoutiFast if !self.channel.is_static() => {
                    return bad(format!(
                        "decoder 'alamouti-fast' needs a quasistatic channel, not {}",
                        self.channel
                    ));
                }
                DecoderKind::Exhaustive if self.modulation > 64 => {
                    return bad("exhaustive decoding is capped at 64-QAM".into());
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Statistics for one decoder at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub decoder: String,
    pub code: String,
    pub modulation: usize,
    pub channel: String,
    pub trials: usize,
    pub ser: f64,
    pub nodes_mean: f64,
    pub nodes_p95: f64,
    pub nodes_max: u64,
    pub sorts_mean: f64,
    pub time_ns_mean: f64,
}

impl SweepRow {
    /// 95th percentile noticeably above the mean indicates a heavy tail.
    pub fn heavy_tail(&self) -> bool {
        self.nodes_p95 >= 2.0 * self.nodes_mean
    }
}

/// Rows ordered by ascending SNR, then decoder name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn row(&self, snr_db: f64, decoder: &str) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.snr_db == snr_db && r.decoder == decoder)
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    symbol_errors: u32,
    nodes: u64,
    sorts: u64,
    time_ns: u64,
}

/// One trial: every decoder sees the same channel, symbols and noise.
fn run_trial(cfg: &SweepConfig, alphabet: &QamAlphabet, trial: u64, n0: f64) -> Result<Vec<Outcome>> {
    // trial-indexed stream, shared across SNR points
    let mut rng = stream_rng(cfg.seed, trial);
    let ch = sample_channel(&mut rng, cfg.channel)?;
    let sent: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..cfg.modulation));
    let x = sent.map(|k| alphabet.symbol(k));
    let noise = if cfg.noiseless {
        [Complex64::new(0.0, 0.0); 4]
    } else {
        sample_noise(&mut rng, n0)
    };
    let y = transmit(&encode(cfg.code, &x), &ch, &noise, cfg.code);
    let eff = effective_channel(&ch, cfg.code);
    cfg.decoders
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let r = decode(kind, &eff, &y, alphabet, cfg.ordering, SearchOptions::default())?;
            let time_ns = start.elapsed().as_nanos() as u64;
            let symbol_errors = r.indices.iter().zip(&sent).filter(|(a, b)| a != b).count() as u32;
            Ok(Outcome {
                symbol_errors,
                nodes: r.nodes_visited,
                sorts: r.full_sorts,
                time_ns,
            })
        })
        .collect()
}

fn summarize(cfg: &SweepConfig, snr_db: f64, decoder: DecoderKind, outcomes: &[Outcome]) -> SweepRow {
    let n = outcomes.len();
    let errors: u64 = outcomes.iter().map(|o| o.symbol_errors as u64).sum();
    let mut nodes: Vec<u64> = outcomes.iter().map(|o| o.nodes).collect();
    let nodes_mean = nodes.iter().sum::<u64>() as f64 / n as f64;
    nodes.sort_unstable();
    // nearest-rank percentile
    let p95_rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
    SweepRow {
        snr_db,
        decoder: decoder.name().to_string(),
        code: cfg.code.name().to_string(),
        modulation: cfg.modulation,
        channel: cfg.channel.to_string(),
        trials: n,
        ser: errors as f64 / (4 * n) as f64,
        nodes_mean,
        nodes_p95: nodes[p95_rank - 1] as f64,
        nodes_max: *nodes.last().expect("at least one trial"),
        sorts_mean: outcomes.iter().map(|o| o.sorts).sum::<u64>() as f64 / n as f64,
        time_ns_mean: outcomes.iter().map(|o| o.time_ns as f64).sum::<f64>() / n as f64,
    }
}

/// Runs the sweep described by `cfg`.
///
/// Trials run in parallel but are merged in trial order, so the report does
/// not depend on the number of threads (wall time aside).
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| StcError::InvalidConfig(format!("thread pool: {e}")))?;

    let alphabet = make_qam(cfg.modulation)?;
    let mut order: Vec<(usize, DecoderKind)> = cfg.decoders.iter().copied().enumerate().collect();
    order.sort_by_key(|(_, d)| d.name());

    let mut rows = Vec::new();
    for snr_db in cfg.snr_points() {
        let n0 = snr_to_n0(snr_db);
        let per_trial: Vec<Vec<Outcome>> = pool.install(|| {
            (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| run_trial(cfg, &alphabet, t, n0))
                .collect::<Result<Vec<_>>>()
        })?;
        for &(slot, kind) in &order {
            let outcomes: Vec<Outcome> = per_trial.iter().map(|o| o[slot]).collect();
            rows.push(summarize(cfg, snr_db, kind, &outcomes));
        }
    }
    Ok(SweepReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(decoders: Vec<DecoderKind>) -> SweepConfig {
        SweepConfig {
            decoders,
            modulation: 4,
            snr_start: 0.0,
            snr_stop: 10.0,
            snr_step: 5.0,
            trials: 50,
            seed: 9,
            threads: Some(2),
            ..SweepConfig::default()
        }
    }

    #[test]
    fn grid_arithmetic() {
        let cfg = SweepConfig::default();
        let pts = cfg.snr_points();
        assert_eq!(pts.len(), 16);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[15], 30.0);
        let odd = SweepConfig {
            snr_start: 1.0,
            snr_stop: 2.0,
            snr_step: 0.3,
            ..SweepConfig::default()
        };
        assert_eq!(odd.snr_points().len(), 4);
    }

    #[test]
    fn noiseless_sweep_has_zero_ser() {
        let cfg = SweepConfig {
            noiseless: true,
            trials: 1,
            ..small(vec![DecoderKind::Fast, DecoderKind::Sphere, DecoderKind::Exhaustive])
        };
        let rep = run_sweep(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 9);
        assert!(rep.rows.iter().all(|r| r.ser == 0.0));
    }

    #[test]
    fn rows_sorted_by_snr_then_name() {
        let rep = run_sweep(&small(vec![DecoderKind::Sphere, DecoderKind::Fast])).unwrap();
        let keys: Vec<(f64, &str)> = rep.rows.iter().map(|r| (r.snr_db, r.decoder.as_str())).collect();
        assert_eq!(
            keys,
            vec![(0.0, "fast"), (0.0, "sphere"), (5.0, "fast"), (5.0, "sphere"), (10.0, "fast"), (10.0, "sphere")]
        );
    }

    #[test]
    fn ml_decoders_agree_on_ser() {
        let rep = run_sweep(&small(vec![DecoderKind::Exhaustive, DecoderKind::Fast])).unwrap();
        for snr in [0.0, 5.0, 10.0] {
            assert_eq!(rep.row(snr, "fast").unwrap().ser, rep.row(snr, "exhaustive").unwrap().ser);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut a = run_sweep(&small(vec![DecoderKind::Fast])).unwrap();
        let mut b = run_sweep(&SweepConfig {
            threads: Some(1),
            ..small(vec![DecoderKind::Fast])
        })
        .unwrap();
        for r in a.rows.iter_mut().chain(b.rows.iter_mut()) {
            r.time_ns_mean = 0.0;
        }
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = small(vec![DecoderKind::Fast]);
        let cases = [
            SweepConfig { trials: 0, ..base.clone() },
            SweepConfig { snr_step: 0.0, ..base.clone() },
            SweepConfig { snr_stop: -1.0, ..base.clone() },
            SweepConfig { modulation: 8, ..base.clone() },
            SweepConfig { decoders: vec![], ..base.clone() },
            SweepConfig { decoders: vec![DecoderKind::Fast, DecoderKind::Fast], ..base.clone() },
            SweepConfig { code: CodeVariant::OverlaidAlamouti, ..base.clone() },
            SweepConfig {
                code: CodeVariant::OverlaidAlamouti,
                decoders: vec![DecoderKind::AlamoutiFast],
                channel: ChannelModel::Rapid,
                ..base.clone()
            },
            SweepConfig { decoders: vec![DecoderKind::AlamoutiFast], ..base.clone() },
            SweepConfig { modulation: 256, decoders: vec![DecoderKind::Exhaustive], ..base.clone() },
            SweepConfig { channel: ChannelModel::Markov(2.0), ..base.clone() },
        ];
        for cfg in cases {
            assert!(run_sweep(&cfg).is_err(), "{cfg:?}");
        }
        let ok = SweepConfig {
            code: CodeVariant::OverlaidAlamouti,
            decoders: vec![DecoderKind::AlamoutiFast],
            channel: ChannelModel::Markov(1.0),
            ..base
        };
        assert!(ok.validate().is_ok());
    }
}
