//! Lawson-Hanson active-set NNLS in Gram form.
//!
//! Working with `A = V^T V` and `b = V^T w` lets several right-hand sides
//! share one Gram matrix, which is how dynamic-topic initialization uses it.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView1, ArrayView2};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub coefficients: Array1<f64>,
    /// `|w - V g|^2` at the returned `g`.
    pub objective: f64,
    /// Norm of the projected gradient of `0.5 |w - V g|^2`.
    pub kkt_residual: f64,
}

/// `min |w - V g|^2  s.t. g >= 0` for an `n x m` basis `v` and target `w`.
///
/// `V^T V` is never formed: gradients are evaluated as `V^T (w - V g)` and
/// only the passive-set block of the Gram matrix is built.
pub fn nnls_fixed_basis(v: ArrayView2<'_, f64>, w: ArrayView1<'_, f64>) -> NnlsSolution {
    assert_eq!(v.nrows(), w.len(), "target length must match basis rows");
    let b = v.t().dot(&w);
    let g = lawson_hanson(&Factored { v, w }, b.view());
    let objective = nnls_objective(v, w, g.view());
    let grad = -v.t().dot(&(&w - &v.dot(&g)));
    NnlsSolution {
        kkt_residual: projected_norm(grad.view(), g.view()),
        coefficients: g,
        objective,
    }
}

pub fn nnls_objective(
    v: ArrayView2<'_, f64>,
    w: ArrayView1<'_, f64>,
    g: ArrayView1<'_, f64>,
) -> f64 {
    let r = &w - &v.dot(&g);
    r.dot(&r)
}

fn projected_norm(grad: ArrayView1<'_, f64>, g: ArrayView1<'_, f64>) -> f64 {
    grad.iter()
        .zip(g.iter())
        .map(|(&d, &x)| if x > 0.0 { d } else { d.min(0.0) })
        .map(|d| d * d)
        .sum::<f64>()
        .sqrt()
}

/// Solves `min 0.5 g^T A g - b^T g  s.t. g >= 0` for a positive
/// semi-definite Gram matrix `A`.
pub fn nnls_gram(gram: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Array1<f64> {
    assert_eq!(gram.dim(), (b.len(), b.len()), "Gram matrix must be square");
    lawson_hanson(&Explicit { gram, b }, b)
}

trait GramOps {
    /// `b - A x`
    fn dual(&self, x: &Array1<f64>) -> Array1<f64>;
    fn entry(&self, i: usize, j: usize) -> f64;
    fn diag_max(&self) -> f64;
}

struct Explicit<'a> {
    gram: ArrayView2<'a, f64>,
    b: ArrayView1<'a, f64>,
}

impl GramOps for Explicit<'_> {
    fn dual(&self, x: &Array1<f64>) -> Array1<f64> {
        &self.b - &self.gram.dot(x)
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.gram[[i, j]]
    }
    fn diag_max(&self) -> f64 {
        self.gram.diag().fold(0.0f64, |acc, &v| acc.max(v))
    }
}

struct Factored<'a> {
    v: ArrayView2<'a, f64>,
    w: ArrayView1<'a, f64>,
}

impl GramOps for Factored<'_> {
    fn dual(&self, x: &Array1<f64>) -> Array1<f64> {
        self.v.t().dot(&(&self.w - &self.v.dot(x)))
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.v.column(i).dot(&self.v.column(j))
    }
    fn diag_max(&self) -> f64 {
        self.v
            .columns()
            .into_iter()
            .fold(0.0f64, |acc, c| acc.max(c.dot(&c)))
    }
}

fn lawson_hanson(ops: &impl GramOps, b: ArrayView1<'_, f64>) -> Array1<f64> {
    let m = b.len();
    let mut x = Array1::<f64>::zeros(m);
    let b_scale = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if b_scale == 0.0 {
        return x;
    }
    let tol = 1e-12 * b_scale.max(ops.diag_max());

    let mut passive = vec![false; m];
    let mut blocked = vec![false; m];
    let max_outer = 3 * m.max(10);

    for _ in 0..max_outer {
        let dual = ops.dual(&x);
        let candidate = (0..m)
            .filter(|&j| !passive[j] && !blocked[j] && dual[j] > tol)
            .max_by(|&i, &j| dual[i].total_cmp(&dual[j]).then(j.cmp(&i)));
        let Some(entering) = candidate else { break };
        passive[entering] = true;

        let mut first_pass = true;
        loop {
            let set: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let z = solve_subproblem(ops, b, &set);
            if z.iter().all(|&zi| zi > 0.0) {
                for (&i, &zi) in set.iter().zip(z.iter()) {
                    x[i] = zi;
                }
                break;
            }
            let entering_z = set.iter().position(|&i| i == entering).map(|p| z[p]);
            if first_pass && entering_z.is_some_and(|zj| zj <= 0.0) {
                // numerically dependent column: no descent through it
                passive[entering] = false;
                blocked[entering] = true;
                break;
            }
            first_pass = false;

            // move from x toward z until the first passive variable hits zero
            let mut alpha = f64::INFINITY;
            for (&i, &zi) in set.iter().zip(z.iter()) {
                if zi <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - zi));
                }
            }
            for (&i, &zi) in set.iter().zip(z.iter()) {
                let hits_zero = zi <= 0.0 && x[i] / (x[i] - zi) <= alpha;
                x[i] += alpha * (zi - x[i]);
                if hits_zero || x[i] <= 0.0 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

fn solve_subproblem(ops: &impl GramOps, b: ArrayView1<'_, f64>, set: &[usize]) -> Vec<f64> {
    let p = set.len();
    let a = DMatrix::from_fn(p, p, |r, c| ops.entry(set[r], set[c]));
    let rhs = DVector::from_fn(p, |r, _| b[set[r]]);
    if let Some(chol) = a.clone().cholesky() {
        let z = chol.solve(&rhs);
        if z.iter().all(|v| v.is_finite()) {
            return z.iter().copied().collect();
        }
    }
    let svd = a.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    match svd.solve(&rhs, eps) {
        Ok(z) => z.iter().copied().collect(),
        Err(_) => vec![0.0; p],
    }
}
