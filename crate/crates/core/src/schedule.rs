//! Control waveforms Ω(t), Δ(t): linear sweeps, the sweep-quench-sweep
//! rectangle and a response model (time shift plus first-order low-pass).
//!
//! Times are in units of 2π/Ω and detunings in units of Ω, so a sweep rate
//! `r` in units of R₀ = Ω²/2π is simply a slope `dΔ/dt = r`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Relative slack on the sampling range, absorbing round-off in computed end times.
const RANGE_RTOL: f64 = 1e-12;

/// Anything the dynamics engines can drive a Hamiltonian with.
pub trait Control: Send + Sync {
    fn duration(&self) -> f64;

    /// `(Ω, Δ)` at time `t`, without range checks.
    fn value(&self, t: f64) -> (f64, f64);

    /// Times where the waveform may be discontinuous or change slope,
    /// including 0 and the end.
    fn breakpoints(&self) -> Vec<f64>;

    fn sample(&self, t: f64) -> Result<(f64, f64)> {
        let end = self.duration();
        ensure!(
            t >= -RANGE_RTOL * end && t <= end * (1.0 + RANGE_RTOL),
            InvalidArgument,
            "t = {t} outside [0, {end}]"
        );
        Ok(self.value(t.clamp(0.0, end)))
    }
}

/// One piece of a waveform. Both controls are affine in `t - t_ref`; keeping
/// the reference point explicit lets a resumed sweep share its expression
/// with an uninterrupted one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub t_ref: f64,
    pub delta0: f64,
    pub delta_slope: f64,
    pub omega0: f64,
    pub omega_slope: f64,
    #[serde(default)]
    pub label: SegmentLabel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentLabel {
    #[default]
    Sweep,
    Quench,
    RampIn,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn delta_at(&self, t: f64) -> f64 {
        self.delta0 + self.delta_slope * (t - self.t_ref)
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        self.omega0 + self.omega_slope * (t - self.t_ref)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    segments: Vec<Segment>,
}

/// Where the sweep continues after the quench plateau.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resume {
    /// Back at Δ_i (rectangular bump).
    #[default]
    AtInitial,
    /// Continue from Δ_q.
    AtQuench,
}

impl Waveform {
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        ensure!(!segments.is_empty(), InvalidArgument, "waveform needs at least one segment");
        ensure!(segments[0].t_start == 0.0, InvalidArgument, "waveform must start at t = 0");
        for (k, s) in segments.iter().enumerate() {
            ensure!(s.t_end > s.t_start, InvalidArgument, "segment {k} has non-positive duration");
            for v in [s.t_ref, s.delta0, s.delta_slope, s.omega0, s.omega_slope, s.t_end] {
                ensure!(v.is_finite(), InvalidArgument, "segment {k} has a non-finite coefficient");
            }
            if k > 0 {
                ensure!(s.t_start == segments[k - 1].t_end, InvalidArgument, "segment {k} is not contiguous");
            }
        }
        Ok(Waveform { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn segment_at(&self, t: f64) -> &Segment {
        // right-continuous: a boundary belongs to the later segment
        let idx = self.segments.partition_point(|s| s.t_end <= t);
        &self.segments[idx.min(self.segments.len() - 1)]
    }

    /// Prepends an Ω ramp from 0 to the first segment's Ω at constant initial Δ.
    pub fn with_ramp_in(&self, ramp: f64) -> Result<Self> {
        ensure!(ramp > 0.0 && ramp.is_finite(), InvalidArgument, "ramp duration must be positive");
        let first = self.segments[0];
        let omega_target = first.omega_at(0.0);
        let mut segments = vec![Segment {
            t_start: 0.0,
            t_end: ramp,
            t_ref: 0.0,
            delta0: first.delta_at(0.0),
            delta_slope: 0.0,
            omega0: 0.0,
            omega_slope: omega_target / ramp,
            label: SegmentLabel::RampIn,
        }];
        segments.extend(self.segments.iter().map(|s| Segment {
            t_start: s.t_start + ramp,
            t_end: s.t_end + ramp,
            t_ref: s.t_ref + ramp,
            ..*s
        }));
        Waveform::from_segments(segments)
    }

    /// Total |dΔ/dt| integrated over the sweep segments.
    pub fn swept_detuning(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.label == SegmentLabel::Sweep)
            .map(|s| s.delta_slope.abs() * s.duration())
            .sum()
    }

    /// Same waveform run backwards in time.
    pub fn reversed(&self) -> Result<Self> {
        let end = self.duration();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                t_start: end - s.t_end,
                t_end: end - s.t_start,
                t_ref: end - s.t_end,
                delta0: s.delta_at(s.t_end),
                delta_slope: -s.delta_slope,
                omega0: s.omega_at(s.t_end),
                omega_slope: -s.omega_slope,
                label: s.label,
            })
            .collect();
        Waveform::from_segments(segments)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.segments)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let segments: Vec<Segment> = serde_json::from_str(text)?;
        Waveform::from_segments(segments)
    }
}

impl Control for Waveform {
    fn duration(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    fn value(&self, t: f64) -> (f64, f64) {
        let s = self.segment_at(t);
        (s.omega_at(t), s.delta_at(t))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        out.extend(self.segments.iter().map(|s| s.t_end));
        out
    }
}

fn check_rate(rate: f64) -> Result<()> {
    ensure!(rate > 0.0 && rate.is_finite(), InvalidArgument, "sweep rate must be positive, got {rate}");
    Ok(())
}

/// Constant-rate sweep from `delta_start` to `delta_end` at `rate` (units of R₀),
/// with Ω = 1. Descending sweeps are allowed.
pub fn linear_sweep(delta_start: f64, delta_end: f64, rate: f64) -> Result<Waveform> {
    check_rate(rate)?;
    ensure!(delta_start != delta_end, InvalidArgument, "sweep endpoints coincide");
    let slope = if delta_end > delta_start { rate } else { -rate };
    Waveform::from_segments(vec![Segment {
        t_start: 0.0,
        t_end: (delta_end - delta_start) / slope,
        t_ref: 0.0,
        delta0: delta_start,
        delta_slope: slope,
        omega0: 1.0,
        omega_slope: 0.0,
        label: SegmentLabel::Sweep,
    }])
}

/// Sweep-quench-sweep parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqsParams {
    pub delta_start: f64,
    pub delta_end: f64,
    pub rate: f64,
    pub delta_i: f64,
    pub delta_q: f64,
    pub t_q: f64,
    #[serde(default)]
    pub resume: Resume,
}

impl SqsParams {
    /// Sweep −4 → 4 at 1.5 R₀ with a (0.55 → 1.5) quench of length 0.45.
    pub fn reference() -> Self {
        SqsParams { delta_start: -4.0, delta_end: 4.0, rate: 1.5, delta_i: 0.55, delta_q: 1.5, t_q: 0.45, resume: Resume::AtInitial }
    }

    pub fn with_t_q(self, t_q: f64) -> Self {
        SqsParams { t_q, ..self }
    }

    pub fn build(&self) -> Result<Waveform> {
        sqs_with_resume(self.delta_start, self.delta_end, self.rate, self.delta_i, self.delta_q, self.t_q, self.resume)
    }
}

pub fn sqs(delta_start: f64, delta_end: f64, rate: f64, delta_i: f64, delta_q: f64, t_q: f64) -> Result<Waveform> {
    sqs_with_resume(delta_start, delta_end, rate, delta_i, delta_q, t_q, Resume::AtInitial)
}

/// Linear sweep that jumps from `delta_i` to `delta_q` for `t_q`, then resumes.
/// With `t_q = 0` the result coincides with [`linear_sweep`] bit for bit.
pub fn sqs_with_resume(
    delta_start: f64,
    delta_end: f64,
    rate: f64,
    delta_i: f64,
    delta_q: f64,
    t_q: f64,
    resume: Resume,
) -> Result<Waveform> {
    check_rate(rate)?;
    ensure!(delta_end > delta_start, InvalidArgument, "sqs needs an ascending sweep");
    ensure!(
        delta_start < delta_i && delta_i < delta_end,
        InvalidArgument,
        "delta_i = {delta_i} outside the sweep range ({delta_start}, {delta_end})"
    );
    ensure!(t_q >= 0.0 && t_q.is_finite(), InvalidArgument, "t_q must be non-negative");
    ensure!(delta_q.is_finite(), InvalidArgument, "delta_q must be finite");
    let base = Segment {
        t_start: 0.0,
        t_end: 0.0,
        t_ref: 0.0,
        delta0: delta_start,
        delta_slope: rate,
        omega0: 1.0,
        omega_slope: 0.0,
        label: SegmentLabel::Sweep,
    };
    if t_q == 0.0 {
        return linear_sweep(delta_start, delta_end, rate);
    }
    let t1 = (delta_i - delta_start) / rate;
    let t2 = t1 + t_q;
    let last = match resume {
        Resume::AtInitial => Segment { t_start: t2, t_end: t_q + (delta_end - delta_start) / rate, t_ref: t_q, ..base },
        Resume::AtQuench => {
            ensure!(delta_q < delta_end, InvalidArgument, "resuming at delta_q needs delta_q < delta_end");
            Segment { t_start: t2, t_end: t2 + (delta_end - delta_q) / rate, t_ref: t2, delta0: delta_q, ..base }
        }
    };
    Waveform::from_segments(vec![
        Segment { t_end: t1, ..base },
        Segment {
            t_start: t1,
            t_end: t2,
            t_ref: t1,
            delta0: delta_q,
            delta_slope: 0.0,
            label: SegmentLabel::Quench,
            ..base
        },
        last,
    ])
}

/// Evaluates `(Ω, Δ)` at `t`, right-continuous at jumps.
pub fn sample(waveform: &Waveform, t: f64) -> Result<(f64, f64)> {
    waveform.sample(t)
}

/// Piecewise-affine waveform delayed by `shift` and, for `tau > 0`, passed
/// through a first-order low-pass on Δ. The duration is unchanged; before
/// `shift` the initial values are held.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredWaveform {
    inner: Waveform,
    tau: f64,
    shift: f64,
    // filter output Δ at each inner segment start
    knots: Vec<f64>,
}

pub fn response_filter(waveform: &Waveform, tau: f64, shift: f64) -> Result<FilteredWaveform> {
    ensure!(tau >= 0.0 && tau.is_finite(), InvalidArgument, "tau must be non-negative");
    ensure!(shift >= 0.0 && shift.is_finite(), InvalidArgument, "shift must be non-negative");
    let mut knots = Vec::with_capacity(waveform.segments.len());
    let mut y = waveform.segments[0].delta_at(0.0);
    for s in &waveform.segments {
        knots.push(y);
        y = lowpass_affine(s, y, s.t_start, s.t_end, tau);
    }
    Ok(FilteredWaveform { inner: waveform.clone(), tau, shift, knots })
}

/// Exact solution of `τ y' = u - y` at `t` for affine input on one segment,
/// starting from `y0` at `t0`.
fn lowpass_affine(s: &Segment, y0: f64, t0: f64, t: f64, tau: f64) -> f64 {
    let u = s.delta_at(t);
    if tau == 0.0 {
        return u;
    }
    let b = s.delta_slope;
    let u0 = s.delta_at(t0);
    u - b * tau + (y0 - u0 + b * tau) * (-(t - t0) / tau).exp()
}

impl FilteredWaveform {
    pub fn inner(&self) -> &Waveform {
        &self.inner
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl Control for FilteredWaveform {
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    fn value(&self, t: f64) -> (f64, f64) {
        let local = (t - self.shift).max(0.0);
        let idx = self.inner.segments.partition_point(|s| s.t_end <= local).min(self.inner.segments.len() - 1);
        let s = &self.inner.segments[idx];
        let delta = if self.tau == 0.0 {
            s.delta_at(local)
        } else {
            lowpass_affine(s, self.knots[idx], s.t_start, local, self.tau)
        };
        (s.omega_at(local), delta)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let end = self.duration();
        let mut out = vec![0.0];
        out.extend(self.inner.breakpoints().into_iter().map(|b| b + self.shift).filter(|&b| b > 0.0 && b < end));
        out.push(end);
        out.dedup();
        out
    }
}

/// Step boundaries for `n_steps` steps, distributed over the intervals
/// between breakpoints in proportion to their length (at least one each), so
/// that no step straddles a jump.
pub fn step_grid(control: &dyn Control, n_steps: usize) -> Result<Vec<f64>> {
    ensure!(n_steps >= 1, InvalidArgument, "n_steps must be at least 1");
    let mut bp = control.breakpoints();
    bp.dedup();
    let end = control.duration();
    ensure!(end > 0.0, InvalidArgument, "control has zero duration");
    let lengths: Vec<f64> = bp.windows(2).map(|w| w[1] - w[0]).collect();
    let ideal: Vec<f64> = lengths.iter().map(|l| l / end * n_steps as f64).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| (x.floor() as usize).max(1)).collect();
    let mut assigned: usize = counts.iter().sum();
    // largest remainders first
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())));
    for &k in order.iter().cycle().take(order.len() * 2) {
        if assigned >= n_steps {
            break;
        }
        counts[k] += 1;
        assigned += 1;
    }
    let mut grid = Vec::with_capacity(assigned + 1);
    grid.push(bp[0]);
    for (k, w) in bp.windows(2).enumerate() {
        for j in 1..counts[k] {
            grid.push(w[0] + (w[1] - w[0]) * j as f64 / counts[k] as f64);
        }
        grid.push(w[1]);
    }
    Ok(grid)
}

/// CSV rows `t,omega,delta` on a uniform grid of `points` samples.
pub fn sample_csv(control: &dyn Control, points: usize) -> Result<String> {
    ensure!(points >= 2, InvalidArgument, "need at least two sample points");
    let end = control.duration();
    let mut out = String::from("t,omega,delta\n");
    for k in 0..points {
        let t = end * k as f64 / (points - 1) as f64;
        let (o, d) = control.sample(t)?;
        writeln!(out, "{t:.16e},{o:.16e},{d:.16e}").map_err(|e| Error::Numeric(e.to_string()))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_sweep_durations() {
        let w = linear_sweep(-4.0, 4.0, 0.5).unwrap();
        // oracle: 8 Ω / (0.5 Ω²/2π) = 32π/Ω = 16 · (2π/Ω)
        let oracle = 8.0 * 2.0 * std::f64::consts::PI / 0.5 / (2.0 * std::f64::consts::PI);
        assert!((w.duration() - oracle).abs() < 1e-12);
        assert_eq!(w.duration(), 16.0);
        assert_eq!(linear_sweep(-1.0, 1.0, 1.0).unwrap().duration(), 2.0);
        assert!(linear_sweep(1.0, 1.0, 1.0).is_err());
        assert!(linear_sweep(-1.0, 1.0, 0.0).is_err());
        assert!(linear_sweep(-1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn linear_sample_points() {
        let w = linear_sweep(-4.0, 4.0, 0.5).unwrap();
        assert_eq!(sample(&w, 8.0).unwrap(), (1.0, 0.0));
        assert_eq!(sample(&w, 0.0).unwrap().1, -4.0);
        assert_eq!(sample(&w, 16.0).unwrap().1, 4.0);
        assert!(sample(&w, 16.1).is_err());
        assert!(sample(&w, -0.1).is_err());
    }

    #[test]
    fn sqs_reference_boundaries() {
        let w = sqs(-4.0, 4.0, 1.75, 0.55, 1.5, 0.45).unwrap();
        let t1: f64 = 4.55 / 1.75;
        assert!((t1 - 2.6).abs() < 1e-12);
        let segs = w.segments();
        assert_eq!(segs.len(), 3);
        assert!((segs[0].t_end - 2.6).abs() < 1e-12);
        assert!((segs[1].t_end - 3.05).abs() < 1e-12);
        assert!((w.duration() - (8.0 / 1.75 + 0.45)).abs() < 1e-12);
        assert!((w.duration() - 5.021428571428571).abs() < 1e-12);
        let just_below = segs[0].t_end * (1.0 - 1e-12);
        assert!((sample(&w, just_below).unwrap().1 - 0.55).abs() < 1e-9);
        assert_eq!(sample(&w, segs[0].t_end).unwrap().1, 1.5);
        // resumes at Δ_i
        assert!((sample(&w, segs[1].t_end).unwrap().1 - 0.55).abs() < 1e-12);
        assert_eq!(sample(&w, 0.0).unwrap().1, -4.0);
        assert!((sample(&w, w.duration()).unwrap().1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sqs_zero_quench_is_linear() {
        let a = sqs(-4.0, 4.0, 1.5, 0.55, 1.5, 0.0).unwrap();
        let b = linear_sweep(-4.0, 4.0, 1.5).unwrap();
        for k in 0..=1000 {
            let t = b.duration() * k as f64 / 1000.0;
            assert_eq!(a.sample(t).unwrap(), b.sample(t).unwrap());
        }
    }

    #[test]
    fn sqs_degenerate_quench_is_continuous() {
        let w = sqs(-4.0, 4.0, 1.5, 0.55, 0.55, 0.3).unwrap();
        let t1 = w.segments()[0].t_end;
        assert!((w.sample(t1 - 1e-12).unwrap().1 - w.sample(t1).unwrap().1).abs() < 1e-9);
        assert_eq!(w.sample(t1 + 0.1).unwrap().1, 0.55);
    }

    #[test]
    fn sqs_rejects_out_of_range_delta_i() {
        assert!(sqs(-4.0, 4.0, 1.5, 4.5, 1.5, 0.4).is_err());
        assert!(sqs(-4.0, 4.0, 1.5, -4.0, 1.5, 0.4).is_err());
        assert!(sqs(-4.0, 4.0, 1.5, 0.5, 1.5, -0.1).is_err());
    }

    #[test]
    fn resume_at_quench_variant() {
        let w = sqs_with_resume(-4.0, 4.0, 1.0, 0.5, 1.5, 0.5, Resume::AtQuench).unwrap();
        let t2 = w.segments()[1].t_end;
        assert_eq!(w.sample(t2).unwrap().1, 1.5);
        assert!((w.duration() - (4.5 + 0.5 + 2.5)).abs() < 1e-12);
    }

    #[test]
    fn swept_detuning_is_independent_of_quench_length() {
        for t_q in [0.0, 0.2, 0.45, 1.1] {
            let w = sqs(-4.0, 4.0, 1.5, 0.55, 1.5, t_q).unwrap();
            let sweep_time = w.duration() - t_q;
            assert!((w.swept_detuning() - 1.5 * sweep_time).abs() < 1e-12);
        }
    }

    #[test]
    fn reversal_swaps_endpoints() {
        let w = linear_sweep(-2.0, 3.0, 0.7).unwrap();
        let r = w.reversed().unwrap();
        let swapped = linear_sweep(3.0, -2.0, 0.7).unwrap();
        assert!((r.duration() - swapped.duration()).abs() < 1e-12);
        for k in 0..=50 {
            let t = r.duration() * k as f64 / 50.0;
            assert!((r.sample(t).unwrap().1 - swapped.sample(t).unwrap().1).abs() < 1e-12);
        }
    }

    #[test]
    fn response_shift_and_identity() {
        let step = sqs(-1.0, 1.0, 1.0, 0.0, 2.0, 1.0).unwrap();
        let same = response_filter(&step, 0.0, 0.0).unwrap();
        for k in 0..=300 {
            let t = step.duration() * k as f64 / 300.0;
            assert_eq!(same.sample(t).unwrap(), step.sample(t).unwrap());
        }
        let shifted = response_filter(&step, 0.0, 0.02).unwrap();
        let t1 = step.segments()[0].t_end;
        assert!((shifted.sample(t1 + 0.01).unwrap().1 - step.sample(t1 - 0.01).unwrap().1).abs() < 1e-12);
        assert_eq!(shifted.sample(t1 + 0.02).unwrap().1, 2.0);
        assert_eq!(shifted.sample(0.01).unwrap().1, -1.0);
    }

    #[test]
    fn lowpass_step_response_matches_rc_formula() {
        // flat at 0, then a unit step held for a long time
        let w = Waveform::from_segments(vec![
            Segment { t_start: 0.0, t_end: 1.0, t_ref: 0.0, delta0: 0.0, delta_slope: 0.0, omega0: 1.0, omega_slope: 0.0, label: SegmentLabel::Sweep },
            Segment { t_start: 1.0, t_end: 5.0, t_ref: 1.0, delta0: 1.0, delta_slope: 0.0, omega0: 1.0, omega_slope: 0.0, label: SegmentLabel::Quench },
        ])
        .unwrap();
        let tau = 0.3;
        let f = response_filter(&w, tau, 0.0).unwrap();
        for k in 0..=40 {
            let dt = 4.0 * k as f64 / 40.0;
            let expected = 1.0 - (-dt / tau).exp();
            assert!((f.sample(1.0 + dt).unwrap().1 - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn lowpass_ramp_tracks_with_lag() {
        let w = linear_sweep(0.0, 10.0, 1.0).unwrap();
        let tau = 0.5;
        let f = response_filter(&w, tau, 0.0).unwrap();
        // analytic: y = t - τ (1 - e^{-t/τ})
        for t in [0.1, 1.0, 3.0, 9.0] {
            let expected = t - tau * (1.0 - (-t / tau).exp());
            assert!((f.sample(t).unwrap().1 - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn step_grid_aligns_with_jumps() {
        let w = sqs(-4.0, 4.0, 1.5, 0.55, 1.5, 0.45).unwrap();
        let grid = step_grid(&w, 1000).unwrap();
        assert_eq!(grid.len(), 1001);
        for b in w.breakpoints() {
            assert!(grid.contains(&b), "breakpoint {b} missing");
        }
        assert!(grid.windows(2).all(|p| p[1] > p[0]));
        let few = step_grid(&w, 1).unwrap();
        assert_eq!(few.len(), 4);
    }

    #[test]
    fn json_and_csv_round_trip() {
        let w = sqs(-4.0, 4.0, 1.5, 0.55, 1.5, 0.45).unwrap().with_ramp_in(0.2).unwrap();
        let back = Waveform::from_json(&w.to_json().unwrap()).unwrap();
        assert_eq!(w, back);
        assert_eq!(w.sample(0.0).unwrap().0, 0.0);
        assert_eq!(w.sample(0.2).unwrap(), (1.0, -4.0));
        let csv = sample_csv(&w, 11).unwrap();
        assert_eq!(csv.lines().count(), 12);
        assert!(csv.starts_with("t,omega,delta\n"));
    }
}
