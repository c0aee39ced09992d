//! Non-negative factorization kernels.
//!
//! * [`nmf_fit`] / [`snmf_fit`]: Frobenius NMF and its elastic-net regularized
//!   variant, both by multiplicative updates.
//! * [`nnls_fixed_basis`]: non-negative least squares against a fixed basis,
//!   used to express dynamic topics as non-negative combinations of the data.
//! * [`cnmf_fit`]: convex NMF `V ~ V G H` with the basis constrained to the
//!   conic hull of the data columns.
//!
//! All iterative solvers share one stop rule: after each update the loss is
//! evaluated and iteration stops once it drops below `abs_threshold` or its
//! relative change falls below `rel_tolerance`.

mod convex;
pub mod io;
mod nmf;
mod nnls;

use ndarray::{Array2, ArrayView2, Zip};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use convex::{cnmf_fit, cnmf_update_step, convex_objective, ConvexFactors};
pub use nmf::{nmf_fit, nmf_fit_from, nmf_update_step, snmf_fit, snmf_objective, snmf_update_step};
pub use nnls::{nnls_fixed_basis, nnls_gram, nnls_objective, NnlsSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Number of factors (topics).
    pub k: usize,
    pub max_iters: usize,
    /// Stop as soon as the loss falls below this value. Zero disables it.
    pub abs_threshold: f64,
    /// Stop when `|L_i - L_{i-1}| / max(L_{i-1}, eps) < rel_tolerance`.
    pub rel_tolerance: f64,
    pub seed: u64,
    /// Floor added to every multiplicative-update denominator.
    pub epsilon_guard: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            k: 5,
            max_iters: 300,
            abs_threshold: 0.0,
            rel_tolerance: 1e-5,
            seed: 0,
            epsilon_guard: 1e-12,
        }
    }
}

impl FitConfig {
    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if self.abs_threshold.is_nan()
            || self.abs_threshold < 0.0
            || self.rel_tolerance.is_nan()
            || self.rel_tolerance < 0.0
        {
            return Err(Error::Config("thresholds must be non-negative".into()));
        }
        if self.epsilon_guard.is_nan() || self.epsilon_guard <= 0.0 {
            return Err(Error::Config("epsilon_guard must be positive".into()));
        }
        Ok(())
    }

    /// Stop test applied after the loss of iteration `current` was computed.
    pub(crate) fn should_stop(&self, previous: f64, current: f64) -> bool {
        if current < self.abs_threshold {
            return true;
        }
        (previous - current).abs() / previous.max(self.epsilon_guard) < self.rel_tolerance
    }
}

/// Elastic-net penalty for [`snmf_fit`]:
///
/// `alpha * l * n1 * |W|_1 + beta * l * n2 * |H|_1
///  + 0.5 * alpha * (1 - l) * n1 * |W|_F^2 + 0.5 * beta * (1 - l) * n2 * |H|_F^2`
///
/// where `n1` is the column count (features) and `n2` the row count (samples)
/// of the factored matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnmfConfig {
    pub alpha: f64,
    pub beta: f64,
    pub l1_ratio: f64,
}

impl Default for SnmfConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-5,
            beta: 0.0,
            l1_ratio: 0.0,
        }
    }
}

impl SnmfConfig {
    pub const NONE: SnmfConfig = SnmfConfig {
        alpha: 0.0,
        beta: 0.0,
        l1_ratio: 0.0,
    };

    pub fn with_l1_ratio(self, l1_ratio: f64) -> Self {
        Self { l1_ratio, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::Config("alpha and beta must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.l1_ratio) {
            return Err(Error::Config(format!(
                "l1_ratio {} outside [0, 1]",
                self.l1_ratio
            )));
        }
        Ok(())
    }

    /// Per-entry penalty coefficients `(l1_w, l2_w, l1_h, l2_h)` for a
    /// `rows x cols` input.
    pub(crate) fn coefficients(&self, rows: usize, cols: usize) -> Penalty {
        let n_features = cols as f64;
        let n_samples = rows as f64;
        Penalty {
            l1_w: self.alpha * self.l1_ratio * n_features,
            l2_w: self.alpha * (1.0 - self.l1_ratio) * n_features,
            l1_h: self.beta * self.l1_ratio * n_samples,
            l2_h: self.beta * (1.0 - self.l1_ratio) * n_samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Penalty {
    pub l1_w: f64,
    pub l2_w: f64,
    pub l1_h: f64,
    pub l2_h: f64,
}

/// Non-negative factor pair `V ~ W H` with its loss history.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    /// rows x k
    pub w: Array2<f64>,
    /// k x cols
    pub h: Array2<f64>,
    /// Loss before the first update.
    pub initial_loss: f64,
    /// Loss after each update.
    pub loss_trace: Vec<f64>,
    pub iterations_run: usize,
}

impl FactorPair {
    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().copied().unwrap_or(self.initial_loss)
    }
}

/// Elementwise positive and negative parts, `m = plus - minus`.
pub fn pos_neg_split(m: ArrayView2<'_, f64>) -> (Array2<f64>, Array2<f64>) {
    let plus = m.mapv(|x| if x > 0.0 { x } else { 0.0 });
    let minus = m.mapv(|x| if x < 0.0 { -x } else { 0.0 });
    (plus, minus)
}

/// `rows x cols` matrix of values uniform in `(0, 1]`.
///
/// Entries are filled row-major from a ChaCha8 stream seeded with `seed`:
/// each value is `((u >> 11) + 1) * 2^-53` for the next `u64` `u`, so the
/// result is identical on every platform.
pub fn seeded_init(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    uniform_matrix(&mut rng, rows, cols)
}

pub(crate) fn uniform_matrix(rng: &mut impl RngCore, rows: usize, cols: usize) -> Array2<f64> {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    Array2::from_shape_simple_fn((rows, cols), || ((rng.next_u64() >> 11) + 1) as f64 * SCALE)
}

/// Squared Frobenius residual `|v - w h|_F^2`.
pub fn reconstruction_error(
    v: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
) -> f64 {
    let wh = w.dot(&h);
    squared_distance(v, wh.view())
}

pub(crate) fn squared_distance(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let mut acc = 0.0;
    Zip::from(&a).and(&b).for_each(|&x, &y| {
        let d = x - y;
        acc += d * d;
    });
    acc
}

pub(crate) fn check_non_negative(v: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, col), &value) in v.indexed_iter() {
        if value.is_nan() || value < 0.0 {
            return Err(Error::NegativeEntry { row, col, value });
        }
    }
    Ok(())
}
