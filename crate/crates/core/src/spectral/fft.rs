use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: Lazy<Mutex<HashMap<usize, Arc<Plans>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plans(m: usize) -> Arc<Plans> {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(m),
                inverse: planner.plan_fft_inverse(m),
            })
        })
        .clone()
}

/// Unnormalized 2D transform of a row-major `m x m` buffer.
/// `inverse` selects the `e^{+i}` kernel.
pub(crate) fn fft2(data: &mut [Complex64], m: usize, inverse: bool) {
    debug_assert_eq!(data.len(), m * m);
    let p = plans(m);
    let fft = if inverse { &p.inverse } else { &p.forward };
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, m);
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, m);
}

fn transpose(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}
