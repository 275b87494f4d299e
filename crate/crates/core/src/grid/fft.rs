//! N-dimensional complex FFT over the row-major lattice, with plans shared
//! process-wide per (scalar type, axis length).

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::scalar::{czero, Complex, Real};

struct Plans<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

type PlanCache = Mutex<HashMap<(TypeId, usize), Arc<dyn Any + Send + Sync>>>;

fn plans<T: Real>(n: usize) -> Arc<Plans<T>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let entry = guard.entry((TypeId::of::<T>(), n)).or_insert_with(|| {
        let mut planner = FftPlanner::<T>::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Arc::new(plans) as Arc<dyn Any + Send + Sync>
    });
    Arc::clone(entry)
        .downcast::<Plans<T>>()
        .expect("plan cache keyed by scalar type")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    /// Unnormalized inverse; callers divide by `n^d`.
    Inverse,
}

/// In-place transform of `data` (length `n^dim`, last axis contiguous).
pub(crate) fn transform<T: Real>(data: &mut [Complex<T>], n: usize, dim: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let plans = plans::<T>(n);
    let fft = match dir {
        Direction::Forward => &plans.forward,
        Direction::Inverse => &plans.inverse,
    };
    let mut scratch = vec![czero::<T>(); fft.get_inplace_scratch_len()];
    let total = data.len();
    let mut lines: Vec<Complex<T>> = Vec::new();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        if lines.is_empty() {
            lines = vec![czero::<T>(); total];
        }
        let block = n * stride;
        for (src, dst) in data.chunks(block).zip(lines.chunks_mut(block)) {
            for k in 0..n {
                let row = &src[k * stride..(k + 1) * stride];
                for (i, v) in row.iter().enumerate() {
                    dst[i * n + k] = *v;
                }
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        for (dst, src) in data.chunks_mut(block).zip(lines.chunks(block)) {
            for k in 0..n {
                let row = &mut dst[k * stride..(k + 1) * stride];
                for (i, v) in row.iter_mut().enumerate() {
                    *v = src[i * n + k];
                }
            }
        }
    }
}

pub(crate) fn forward<T: Real>(data: &mut [Complex<T>], n: usize, dim: usize) {
    transform(data, n, dim, Direction::Forward);
}

/// Normalized inverse (divides by `n^d`).
pub(crate) fn inverse<T: Real>(data: &mut [Complex<T>], n: usize, dim: usize) {
    transform(data, n, dim, Direction::Inverse);
    let scale = T::one() / T::of_usize(data.len());
    for v in data.iter_mut() {
        *v = *v * scale;
    }
}
