//! Convex NMF `V ~ V G H` with `G, H >= 0`.
//!
//! With `A = V^T V = A+ - A-` the gradient of `0.5 |V - V G H|_F^2` splits
//! into non-negative parts
//!
//! ```text
//! dG:  (A- H^T + A+ G H H^T) - (A+ H^T + A- G H H^T)
//! dH:  (G^T A- + G^T A+ G H) - (G^T A+ + G^T A- G H)
//! ```
//!
//! and each factor is scaled by the square root of the ratio of the negative
//! part to the positive part. Both square-root rules minimize an auxiliary
//! upper bound, so the objective never increases.

use ndarray::{Array2, ArrayView2, Zip};

use super::{check_non_negative, pos_neg_split, squared_distance, FitConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFactors {
    /// cols x k combination weights.
    pub g: Array2<f64>,
    /// rows x k basis, always exactly `V . G`.
    pub w_tilde: Array2<f64>,
    /// k x cols
    pub h_tilde: Array2<f64>,
    pub initial_loss: f64,
    pub loss_trace: Vec<f64>,
    pub iterations_run: usize,
}

impl ConvexFactors {
    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().copied().unwrap_or(self.initial_loss)
    }
}

/// `0.5 |V - V G H|_F^2`
pub fn convex_objective(
    v: ArrayView2<'_, f64>,
    g: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
) -> f64 {
    let approx = v.dot(&g).dot(&h);
    0.5 * squared_distance(v, approx.view())
}

/// One update of `G` then `H` (against the new `G`).
pub fn cnmf_update_step(
    a_plus: ArrayView2<'_, f64>,
    a_minus: ArrayView2<'_, f64>,
    g: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
    epsilon_guard: f64,
) -> (Array2<f64>, Array2<f64>) {
    let mut g = g.to_owned();
    let mut h = h.to_owned();
    let gram = Gram::Explicit {
        plus: a_plus,
        minus: a_minus.iter().any(|&x| x != 0.0).then_some(a_minus),
    };
    step(&gram, &mut g, &mut h, epsilon_guard);
    (g, h)
}

/// Products with `A+` and `A-`. For non-negative `V` the split is trivial
/// (`A- = 0`, `A+ = V^T V`) and `A+ X` is evaluated as `V^T (V X)` without
/// forming the cols x cols Gram matrix.
enum Gram<'a> {
    Explicit {
        plus: ArrayView2<'a, f64>,
        minus: Option<ArrayView2<'a, f64>>,
    },
    Factored(ArrayView2<'a, f64>),
}

impl Gram<'_> {
    fn plus(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        match self {
            Gram::Explicit { plus, .. } => plus.dot(&x),
            Gram::Factored(v) => v.t().dot(&v.dot(&x)),
        }
    }

    fn minus(&self, x: ArrayView2<'_, f64>) -> Option<Array2<f64>> {
        match self {
            Gram::Explicit { minus: Some(m), .. } => Some(m.dot(&x)),
            _ => None,
        }
    }
}

fn step(gram: &Gram<'_>, g: &mut Array2<f64>, h: &mut Array2<f64>, eps: f64) {
    let hht = h.dot(&h.t());
    let ht = h.t();

    // G <- G * sqrt((A+ H^T + A- G H H^T) / (A- H^T + A+ G H H^T))
    let mut numer = gram.plus(ht);
    let mut denom = gram.plus(g.view()).dot(&hht);
    if let Some(minus_g) = gram.minus(g.view()) {
        numer += &minus_g.dot(&hht);
        denom += &gram.minus(ht).expect("minus part present");
    }
    Zip::from(&mut *g)
        .and(&numer)
        .and(&denom)
        .for_each(|x, &n, &d| *x *= (n / (d + eps)).sqrt());

    // H <- H * sqrt((G^T A+ + G^T A- G H) / (G^T A- + G^T A+ G H))
    let plus_g = gram.plus(g.view());
    let gt_plus_g = g.t().dot(&plus_g);
    let mut numer = plus_g.t().to_owned();
    let mut denom = gt_plus_g.dot(&*h);
    if let Some(minus_g) = gram.minus(g.view()) {
        let gt_minus_g = g.t().dot(&minus_g);
        numer += &gt_minus_g.dot(&*h);
        denom += &minus_g.t();
    }
    Zip::from(&mut *h)
        .and(&numer)
        .and(&denom)
        .for_each(|x, &n, &d| *x *= (n / (d + eps)).sqrt());
}

/// Runs convex NMF from `(g_init, h_init)` until the stop rule fires.
/// `w_tilde` is recomputed as `V . G` after every update.
pub fn cnmf_fit(
    v: ArrayView2<'_, f64>,
    g_init: ArrayView2<'_, f64>,
    h_init: ArrayView2<'_, f64>,
    config: &FitConfig,
) -> Result<ConvexFactors> {
    config.validate()?;
    let (rows, cols) = v.dim();
    let k = g_init.ncols();
    if g_init.nrows() != cols || h_init.dim() != (k, cols) {
        return Err(Error::Shape(format!(
            "convex factors for a {rows}x{cols} matrix need G {cols}xk and H kx{cols}, got {:?} and {:?}",
            g_init.dim(),
            h_init.dim()
        )));
    }
    check_non_negative(g_init)?;
    check_non_negative(h_init)?;

    let split;
    let gram = if v.iter().all(|&x| x >= 0.0) {
        Gram::Factored(v)
    } else {
        let a = v.t().dot(&v);
        split = pos_neg_split(a.view());
        Gram::Explicit {
            plus: split.0.view(),
            minus: Some(split.1.view()),
        }
    };

    let mut g = g_init.to_owned();
    let mut h = h_init.to_owned();
    let loss =
        |w_tilde: &Array2<f64>, h: &Array2<f64>| 0.5 * squared_distance(v, w_tilde.dot(h).view());

    let mut w_tilde = v.dot(&g);
    let initial_loss = loss(&w_tilde, &h);
    let mut trace = Vec::with_capacity(config.max_iters);
    let mut previous = initial_loss;
    for _ in 0..config.max_iters {
        step(&gram, &mut g, &mut h, config.epsilon_guard);
        w_tilde = v.dot(&g);
        let current = loss(&w_tilde, &h);
        trace.push(current);
        if config.should_stop(previous, current) {
            break;
        }
        previous = current;
    }

    Ok(ConvexFactors {
        g,
        w_tilde,
        h_tilde: h,
        initial_loss,
        iterations_run: trace.len(),
        loss_trace: trace,
    })
}
