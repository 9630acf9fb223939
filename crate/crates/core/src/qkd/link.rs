use std::io::Write;

use rand::Rng;

use super::cycle::{CycleResult, FeedbackTrigger, LinkModel, CYCLE_SECONDS};
use super::drift::DriftState;
use super::QkdError;

/// Averaging window for reported key rates.
pub const WINDOW_SECONDS: f64 = 300.0;

pub const TRACE_HEADER: [&str; 7] = ["cycle", "time_s", "sifted_bits", "qber", "key_bits", "feedback", "auth_verdict"];

#[derive(Debug, Clone, PartialEq)]
pub struct LinkRun {
    pub cycles: Vec<CycleResult>,
    pub final_state: DriftState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStat {
    pub start_s: f64,
    pub key_rate_kbps: f64,
    /// Mean over cycles outside feedback; 0 if there are none.
    pub mean_qber: f64,
    pub feedback_cycles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSummary {
    pub mean_kbps: f64,
    pub mean_qber: f64,
    /// Standard deviation of the per-window key rates.
    pub kbps_stddev: f64,
    pub windows: Vec<WindowStat>,
    pub qber_triggers: usize,
    pub timer_triggers: usize,
    pub day_triggers: usize,
    pub night_triggers: usize,
}

/// Runs `cycles` consecutive cycles from a fresh drift state. `auth` supplies
/// the verdict of each cycle's authentication.
pub fn run_link(
    model: &LinkModel,
    cycles: u64,
    rng: &mut impl Rng,
    mut auth: impl FnMut(u64) -> bool,
) -> LinkRun {
    let mut d = DriftState::default();
    let mut out = Vec::with_capacity(cycles as usize);
    for c in 0..cycles {
        let (r, next) = model.simulate_cycle(&d, c, auth(c), rng);
        out.push(r);
        d = next;
    }
    LinkRun { cycles: out, final_state: d }
}

fn mean_qber(cs: &[CycleResult]) -> f64 {
    let live: Vec<f64> = cs.iter().filter(|c| !c.feedback).map(|c| c.qber).collect();
    if live.is_empty() {
        0.0
    } else {
        live.iter().sum::<f64>() / live.len() as f64
    }
}

impl LinkRun {
    pub fn total_key_bits(&self) -> u64 {
        self.cycles.iter().map(|c| c.key_bits).sum()
    }

    pub fn duration_s(&self) -> f64 {
        self.cycles.len() as f64 * CYCLE_SECONDS
    }

    /// Contiguous windows of `window_s`; a trailing partial window is kept.
    pub fn windows(&self, window_s: f64) -> Vec<WindowStat> {
        let per = ((window_s / CYCLE_SECONDS).round() as usize).max(1);
        self.cycles
            .chunks(per)
            .map(|w| WindowStat {
                start_s: w[0].time_s,
                key_rate_kbps: w.iter().map(|c| c.key_bits).sum::<u64>() as f64 / (w.len() as f64 * CYCLE_SECONDS) / 1e3,
                mean_qber: mean_qber(w),
                feedback_cycles: w.iter().filter(|c| c.feedback).count(),
            })
            .collect()
    }

    pub fn summary(&self, model: &LinkModel) -> LinkSummary {
        let windows = self.windows(WINDOW_SECONDS);
        let mean_kbps = if self.cycles.is_empty() {
            0.0
        } else {
            self.total_key_bits() as f64 / self.duration_s() / 1e3
        };
        let kbps_stddev = if windows.len() > 1 {
            let m = windows.iter().map(|w| w.key_rate_kbps).sum::<f64>() / windows.len() as f64;
            (windows.iter().map(|w| (w.key_rate_kbps - m).powi(2)).sum::<f64>() / (windows.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut s = LinkSummary {
            mean_kbps,
            mean_qber: mean_qber(&self.cycles),
            kbps_stddev,
            windows,
            qber_triggers: 0,
            timer_triggers: 0,
            day_triggers: 0,
            night_triggers: 0,
        };
        for c in &self.cycles {
            if let Some(t) = c.trigger {
                match t {
                    FeedbackTrigger::Qber => s.qber_triggers += 1,
                    FeedbackTrigger::Timer => s.timer_triggers += 1,
                }
                if model.drift.is_day(c.time_s) {
                    s.day_triggers += 1;
                } else {
                    s.night_triggers += 1;
                }
            }
        }
        s
    }

    /// Per-cycle trace as CSV.
    pub fn write_trace<W: Write>(&self, w: W) -> Result<(), QkdError> {
        let io = |e: csv::Error| QkdError::Io(e.to_string());
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(TRACE_HEADER).map_err(io)?;
        for c in &self.cycles {
            wr.write_record([
                c.cycle.to_string(),
                format!("{:.0}", c.time_s),
                c.sifted_bits.to_string(),
                format!("{:.6}", c.qber),
                c.key_bits.to_string(),
                (c.feedback as u8).to_string(),
                if c.auth_pass { "pass" } else { "fail" }.to_string(),
            ])
            .map_err(io)?;
        }
        wr.flush().map_err(|e| QkdError::Io(e.to_string()))
    }

    /// The first window that ran uninterrupted from a feedback reset until
    /// the 30-minute timer fired, if any: `(first cycle, one past last)`.
    pub fn quiet_window(&self) -> Option<(usize, usize)> {
        let mut start = 0usize;
        for (i, c) in self.cycles.iter().enumerate() {
            if c.feedback {
                start = i + 1;
                continue;
            }
            match c.trigger {
                Some(FeedbackTrigger::Timer) => return Some((start, i + 1)),
                Some(FeedbackTrigger::Qber) => start = i + 1,
                None => {}
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkd::{DriftConfig, LinkParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn model() -> LinkModel {
        LinkModel::new(LinkParams::paper_cal(), DriftConfig::default()).unwrap()
    }

    #[test]
    fn forced_failures_zero_exactly_those_cycles() {
        let m = model();
        let honest = run_link(&m, 600, &mut ChaCha20Rng::seed_from_u64(7), |_| true);
        let forced = run_link(&m, 600, &mut ChaCha20Rng::seed_from_u64(7), |c| !(100..160).contains(&c));
        for (h, f) in honest.cycles.iter().zip(&forced.cycles) {
            if (100..160).contains(&f.cycle) {
                assert_eq!(f.key_bits, 0);
            } else {
                assert_eq!(f, h);
            }
        }
    }

    #[test]
    fn timer_window_found() {
        let m = model();
        let run = run_link(&m, 2000, &mut ChaCha20Rng::seed_from_u64(8), |_| true);
        let (a, b) = run.quiet_window().unwrap();
        assert_eq!((a, b), (0, 1800));
        let s = run.summary(&m);
        assert_eq!(s.timer_triggers, 1);
        assert_eq!(s.windows.len(), 7);
    }

    #[test]
    fn trace_csv_header() {
        let m = model();
        let run = run_link(&m, 3, &mut ChaCha20Rng::seed_from_u64(9), |_| true);
        let mut buf = Vec::new();
        run.write_trace(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("cycle,time_s,sifted_bits,qber,key_bits,feedback,auth_verdict\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
