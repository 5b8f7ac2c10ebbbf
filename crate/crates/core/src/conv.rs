//! Real-vector convolution kernels and the FFT cost model.
//!
//! Three kernels compute the same linear convolution: a direct O(n²) sum used
//! as the reference, a zero-padded FFT, and overlap-add over blocks of the
//! long input. [`shift_add_combine`] assembles a long convolution from
//! piece-convolutions.

use std::ops::Deref;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A non-empty vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("vector must have at least one entry");
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("entry {pos} is not finite"));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = crate::Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// Logarithm base used by the cost model and everything derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }

    /// Natural log of the base, so that `log(x) = ln(x) / ln_base()`.
    pub fn ln_base(self) -> f64 {
        match self {
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::E => 1.0,
        }
    }
}

/// Computational cost of an FFT convolution: `C · m · log(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub c: f64,
    #[serde(default)]
    pub log_base: LogBase,
}

impl CostModel {
    pub fn new(c: f64, log_base: LogBase) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return invalid(format!("cost constant C must be positive and finite, got {c}"));
        }
        Ok(Self { c, log_base })
    }

    pub fn log(&self, x: f64) -> f64 {
        self.log_base.log(x)
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            c: 1.0,
            log_base: LogBase::Two,
        }
    }
}

fn check_inputs(a: &[f64], x: &[f64]) -> Result<()> {
    if a.is_empty() || x.is_empty() {
        return invalid("convolution inputs must be non-empty");
    }
    Ok(())
}

/// Reference convolution: `out[k] = Σ_i a[i]·x[k−i]`.
pub fn convolve_direct(a: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_inputs(a, x)?;
    let mut out = vec![0.0; a.len() + x.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            out[i + j] += ai * xj;
        }
    }
    Ok(out)
}

/// Linear convolution through a zero-padded power-of-two FFT.
pub fn convolve_fft(a: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_inputs(a, x)?;
    let out_len = a.len() + x.len() - 1;
    let n = out_len.next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let pad = |v: &[f64]| {
        let mut buf: Vec<Complex64> = v.iter().map(|&re| Complex64::new(re, 0.0)).collect();
        buf.resize(n, Complex64::new(0.0, 0.0));
        buf
    };
    let mut fa = pad(a);
    let mut fx = pad(x);
    forward.process(&mut fa);
    forward.process(&mut fx);

    for (p, q) in fa.iter_mut().zip(&fx) {
        *p *= q;
    }
    inverse.process(&mut fa);

    let scale = 1.0 / n as f64;
    Ok(fa[..out_len].iter().map(|c| c.re * scale).collect())
}

/// Overlap-add: split `a` into blocks of `block` samples, convolve each with
/// `x`, and sum the block results at their offsets.
pub fn convolve_overlap_add(a: &[f64], x: &[f64], block: usize) -> Result<Vec<f64>> {
    check_inputs(a, x)?;
    if block == 0 {
        return invalid("overlap-add block length must be at least 1");
    }
    let mut out = vec![0.0; a.len() + x.len() - 1];
    for (b, chunk) in a.chunks(block).enumerate() {
        let partial = convolve_fft(chunk, x)?;
        let offset = b * block;
        for (o, v) in out[offset..offset + partial.len()].iter_mut().zip(partial) {
            *o += v;
        }
    }
    Ok(out)
}

/// Sum of zero-padded pieces, piece `i` shifted right by `i · shift_step`.
pub fn shift_add_combine<P: AsRef<[f64]>>(
    pieces: &[P],
    shift_step: usize,
    total_len: usize,
) -> Result<Vec<f64>> {
    if shift_step == 0 || total_len == 0 {
        return invalid("shift step and total length must be positive");
    }
    let mut out = vec![0.0; total_len];
    for (i, piece) in pieces.iter().enumerate() {
        let piece = piece.as_ref();
        let offset = i * shift_step;
        if offset + piece.len() > total_len {
            return invalid(format!(
                "piece {i} of length {} shifted by {offset} overflows total length {total_len}",
                piece.len()
            ));
        }
        for (o, v) in out[offset..offset + piece.len()].iter_mut().zip(piece) {
            *o += v;
        }
    }
    Ok(out)
}

/// `C·(m1+m2)·log(m1+m2)`: cost of one FFT convolution of lengths m1 and m2.
pub fn cost_scenario1(m1: u64, m2: u64, model: &CostModel) -> Result<f64> {
    if m1 == 0 || m2 == 0 {
        return invalid("lengths must be at least 1");
    }
    let m = (m1 + m2) as f64;
    Ok(model.c * m * model.log(m))
}

/// `2C·m1·(log(2·m2)+1)`: overlap-method cost with `m2` the short length.
pub fn cost_scenario2(m1: u64, m2: u64, model: &CostModel) -> Result<f64> {
    if m1 == 0 || m2 == 0 {
        return invalid("lengths must be at least 1");
    }
    if m2 > m1 {
        return invalid(format!("short length {m2} exceeds long length {m1}"));
    }
    Ok(2.0 * model.c * m1 as f64 * (model.log(2.0 * m2 as f64) + 1.0))
}

/// Largest absolute deviation between two equal-length slices, divided by
/// the largest absolute entry of `reference` (or 1 if that is zero).
pub fn max_relative_error(result: &[f64], reference: &[f64]) -> f64 {
    if result.len() != reference.len() {
        return f64::INFINITY;
    }
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    result
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (r, e)| m.max((r - e).abs()))
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn direct_small_cases() {
        assert_eq!(convolve_direct(&[1.0], &[4.0, 5.0, 6.0]).unwrap(), vec![4.0, 5.0, 6.0]);
        assert_eq!(convolve_direct(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![3.0, 10.0, 8.0]);
        assert_eq!(
            convolve_direct(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0]).unwrap(),
            vec![1.0, 3.0, 5.0, 7.0, 4.0]
        );
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(convolve_direct(&[], &[1.0]).is_err());
        assert!(convolve_fft(&[1.0], &[]).is_err());
        assert!(convolve_overlap_add(&[], &[], 2).is_err());
        assert!(RealVector::new(vec![]).is_err());
        assert!(RealVector::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn fft_small_cases() {
        let out = convolve_fft(&[1.0], &[5.0, 6.0, 7.0]).unwrap();
        assert!(max_relative_error(&out, &[5.0, 6.0, 7.0]) < 1e-12);
        let out = convolve_fft(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert!(max_relative_error(&out, &[3.0, 10.0, 8.0]) < 1e-12);
    }

    #[test]
    fn overlap_add_small_cases() {
        let out = convolve_overlap_add(&[1.0, 2.0, 3.0, 4.0], &[1.0], 2).unwrap();
        assert!(max_relative_error(&out, &[1.0, 2.0, 3.0, 4.0]) < 1e-12);
        let out = convolve_overlap_add(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0], 2).unwrap();
        assert!(max_relative_error(&out, &[1.0, 3.0, 5.0, 7.0, 4.0]) < 1e-12);
        assert!(convolve_overlap_add(&[1.0], &[1.0], 0).is_err());
    }

    #[test]
    fn shift_add_cases() {
        let p = vec![1.0, 2.0, 3.0];
        assert_eq!(shift_add_combine(std::slice::from_ref(&p), 7, 3).unwrap(), p);
        let out = shift_add_combine(&[vec![1.0, 3.0, 2.0], vec![3.0, 7.0, 4.0]], 2, 5).unwrap();
        assert_eq!(out, vec![1.0, 3.0, 5.0, 7.0, 4.0]);
        assert!(shift_add_combine(&[vec![1.0, 3.0, 2.0], vec![3.0, 7.0, 4.0]], 2, 4).is_err());
    }

    #[test]
    fn cost_formulas() {
        let m = CostModel::default();
        assert_eq!(cost_scenario1(1024, 1024, &m).unwrap(), 22528.0);
        assert_eq!(cost_scenario1(1, 1, &m).unwrap(), 2.0);
        let m25 = CostModel::new(2.5, LogBase::Two).unwrap();
        let base = cost_scenario1(300, 70, &m).unwrap();
        assert!((cost_scenario1(300, 70, &m25).unwrap() - 2.5 * base).abs() < 1e-9 * base);

        assert_eq!(cost_scenario2(1024, 2, &m).unwrap(), 6144.0);
        assert_eq!(cost_scenario2(1, 1, &m).unwrap(), 4.0);
        let m3 = CostModel::new(3.0, LogBase::Two).unwrap();
        let base = cost_scenario2(500, 40, &m).unwrap();
        assert!((cost_scenario2(500, 40, &m3).unwrap() - 3.0 * base).abs() < 1e-9 * base);
        assert!(cost_scenario2(2, 3, &m).is_err());
        assert!(CostModel::new(0.0, LogBase::E).is_err());
    }

    fn vec_strategy(max: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 1..=max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fft_and_overlap_add_match_direct(a in vec_strategy(256), x in vec_strategy(256), block in 1usize..64) {
            let reference = convolve_direct(&a, &x).unwrap();
            prop_assert!(max_relative_error(&convolve_fft(&a, &x).unwrap(), &reference) < 1e-9);
            prop_assert!(max_relative_error(&convolve_overlap_add(&a, &x, block).unwrap(), &reference) < 1e-9);
        }

        #[test]
        fn fft_commutes(a in vec_strategy(128), x in vec_strategy(128)) {
            let ax = convolve_fft(&a, &x).unwrap();
            let xa = convolve_fft(&x, &a).unwrap();
            prop_assert!(max_relative_error(&ax, &xa) < 1e-12);
        }

        #[test]
        fn fft_is_linear(
            pair in (1usize..96).prop_flat_map(|n| (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )),
            x in vec_strategy(96),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let (a, b) = pair;
            let mix: Vec<f64> = a.iter().zip(&b).map(|(p, q)| alpha * p + beta * q).collect();
            let lhs = convolve_fft(&mix, &x).unwrap();
            let ca = convolve_fft(&a, &x).unwrap();
            let cb = convolve_fft(&b, &x).unwrap();
            let rhs: Vec<f64> = ca.iter().zip(&cb).map(|(p, q)| alpha * p + beta * q).collect();
            prop_assert!(max_relative_error(&lhs, &rhs) < 1e-9);
        }

        #[test]
        fn split_convolve_reconstructs(
            s in 1usize..16,
            pieces in 1usize..16,
            x in vec_strategy(48),
            seed in prop::collection::vec(-5.0f64..5.0, 256),
        ) {
            let a = &seed[..s * pieces];
            let outputs: Vec<Vec<f64>> = a
                .chunks(s)
                .map(|chunk| convolve_direct(chunk, &x).unwrap())
                .collect();
            let combined = shift_add_combine(&outputs, s, a.len() + x.len() - 1).unwrap();
            let reference = convolve_direct(a, &x).unwrap();
            prop_assert!(max_relative_error(&combined, &reference) < 1e-9);
        }
    }
}
