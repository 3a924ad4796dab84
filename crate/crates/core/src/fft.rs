//! Thin multi-dimensional wrapper over `rustfft`.
//!
//! Plans are cached process-wide behind a mutex; scratch buffers are
//! per-invocation, so concurrent transforms on distinct buffers are safe.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanKey = (usize, bool);

fn plan_cache() -> &'static Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = plan_cache().lock().expect("fft plan cache poisoned");
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// Unnormalized complex FFT along every axis of a row-major `n`-dimensional
/// array with `m` samples per axis. Forward uses the `e^{−i…}` kernel.
pub fn transform_nd(data: &mut [Complex64], n: usize, m: usize, forward: bool) {
    debug_assert_eq!(data.len(), m.pow(n as u32));
    let fft = plan(m, forward);
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::ZERO; m];
    let total = data.len();

    for axis in 0..n {
        // Row-major: axis `a` has stride m^{n-1-a}.
        let stride = m.pow((n - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_exact_mut(m) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
        } else {
            let block = stride * m;
            let mut base = 0;
            while base < total {
                for offset in 0..stride {
                    let start = base + offset;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, value) in line.iter().enumerate() {
                        data[start + i * stride] = *value;
                    }
                }
                base += block;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_direct_dft_1d() {
        let m = 8;
        let input: Vec<Complex64> = (0..m)
            .map(|j| Complex64::new(j as f64 + 0.25, (j as f64).sin()))
            .collect();
        let mut out = input.clone();
        transform_nd(&mut out, 1, m, true);
        for k in 0..m {
            let mut direct = Complex64::ZERO;
            for (j, v) in input.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (j * k) as f64 / m as f64;
                direct += v * Complex64::new(phase.cos(), phase.sin());
            }
            assert!((out[k] - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_2d() {
        let m = 8;
        let input: Vec<Complex64> = (0..m * m)
            .map(|j| Complex64::new((j as f64 * 0.7).cos(), (j as f64 * 1.3).sin()))
            .collect();
        let mut data = input.clone();
        transform_nd(&mut data, 2, m, true);
        transform_nd(&mut data, 2, m, false);
        let scale = (m * m) as f64;
        for (a, b) in data.iter().zip(input.iter()) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }
}
