use ndarray::{Array2, ArrayView2, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    check_non_negative, reconstruction_error, uniform_matrix, FactorPair, FitConfig, Penalty,
    SnmfConfig,
};
use crate::error::{Error, Result};

/// One multiplicative step for `|V - WH|_F^2`, `H` first and then `W`
/// against the updated `H`.
pub fn nmf_update_step(
    v: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
    epsilon_guard: f64,
) -> (Array2<f64>, Array2<f64>) {
    let mut w = w.to_owned();
    let mut h = h.to_owned();
    step(
        v,
        &mut w,
        &mut h,
        &SnmfConfig::NONE.coefficients(0, 0),
        epsilon_guard,
    );
    (w, h)
}

/// One multiplicative step for the elastic-net objective of [`snmf_objective`].
/// L1 weights enter the denominators as constants, L2 weights as a diagonal
/// shrinkage proportional to the current factor.
pub fn snmf_update_step(
    v: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
    reg: &SnmfConfig,
    epsilon_guard: f64,
) -> (Array2<f64>, Array2<f64>) {
    let (rows, cols) = v.dim();
    let mut w = w.to_owned();
    let mut h = h.to_owned();
    step(
        v,
        &mut w,
        &mut h,
        &reg.coefficients(rows, cols),
        epsilon_guard,
    );
    (w, h)
}

fn step(v: ArrayView2<'_, f64>, w: &mut Array2<f64>, h: &mut Array2<f64>, p: &Penalty, eps: f64) {
    // H <- H * (W^T V) / (W^T W H + l1_h + l2_h H)
    let numer = w.t().dot(&v);
    let denom = w.t().dot(&*w).dot(&*h);
    Zip::from(&mut *h)
        .and(&numer)
        .and(&denom)
        .for_each(|x, &n, &d| *x *= n / (d + p.l1_h + p.l2_h * *x + eps));

    // W <- W * (V H^T) / (W H H^T + l1_w + l2_w W)
    let numer = v.dot(&h.t());
    let denom = w.dot(&h.dot(&h.t()));
    Zip::from(&mut *w)
        .and(&numer)
        .and(&denom)
        .for_each(|x, &n, &d| *x *= n / (d + p.l1_w + p.l2_w * *x + eps));
}

/// Full regularized objective
/// `0.5 |V - WH|_F^2 + l1_w |W|_1 + l1_h |H|_1 + 0.5 l2_w |W|_F^2 + 0.5 l2_h |H|_F^2`
/// with coefficients from [`SnmfConfig`].
pub fn snmf_objective(
    v: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
    reg: &SnmfConfig,
) -> f64 {
    let (rows, cols) = v.dim();
    penalized(v, w, h, &reg.coefficients(rows, cols))
}

fn penalized(
    v: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
    p: &Penalty,
) -> f64 {
    let sum = |m: ArrayView2<'_, f64>| m.sum();
    let sq = |m: ArrayView2<'_, f64>| m.iter().map(|x| x * x).sum::<f64>();
    0.5 * reconstruction_error(v, w, h)
        + p.l1_w * sum(w)
        + p.l1_h * sum(h)
        + 0.5 * p.l2_w * sq(w)
        + 0.5 * p.l2_h * sq(h)
}

/// Frobenius NMF from a seeded uniform start. The loss trace records
/// `|V - WH|_F^2`.
pub fn nmf_fit(v: ArrayView2<'_, f64>, config: &FitConfig) -> Result<FactorPair> {
    let (w, h) = seeded_start(v, config)?;
    run(v, w, h, config, None)
}

/// Frobenius NMF continuing from the given factors.
pub fn nmf_fit_from(
    v: ArrayView2<'_, f64>,
    w: Array2<f64>,
    h: Array2<f64>,
    config: &FitConfig,
) -> Result<FactorPair> {
    check_shapes(v, &w, &h)?;
    check_non_negative(w.view())?;
    check_non_negative(h.view())?;
    run(v, w, h, config, None)
}

/// Sparse NMF from the same seeded start as [`nmf_fit`]. The loss trace
/// records the full regularized objective, so with `alpha = beta = 0` each
/// entry is exactly half of the corresponding [`nmf_fit`] entry.
pub fn snmf_fit(
    v: ArrayView2<'_, f64>,
    config: &FitConfig,
    reg: &SnmfConfig,
) -> Result<FactorPair> {
    reg.validate()?;
    let (w, h) = seeded_start(v, config)?;
    run(v, w, h, config, Some(reg))
}

fn seeded_start(v: ArrayView2<'_, f64>, config: &FitConfig) -> Result<(Array2<f64>, Array2<f64>)> {
    config.validate()?;
    let (rows, cols) = v.dim();
    if config.k > rows.min(cols) {
        return Err(Error::RankOutOfRange {
            k: config.k,
            rows,
            cols,
        });
    }
    check_non_negative(v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let w = uniform_matrix(&mut rng, rows, config.k);
    let h = uniform_matrix(&mut rng, config.k, cols);
    Ok((w, h))
}

fn check_shapes(v: ArrayView2<'_, f64>, w: &Array2<f64>, h: &Array2<f64>) -> Result<()> {
    let (rows, cols) = v.dim();
    if w.nrows() != rows || h.ncols() != cols || w.ncols() != h.nrows() {
        return Err(Error::Shape(format!(
            "cannot factor {rows}x{cols} as {:?} . {:?}",
            w.dim(),
            h.dim()
        )));
    }
    Ok(())
}

fn run(
    v: ArrayView2<'_, f64>,
    mut w: Array2<f64>,
    mut h: Array2<f64>,
    config: &FitConfig,
    reg: Option<&SnmfConfig>,
) -> Result<FactorPair> {
    config.validate()?;
    let (rows, cols) = v.dim();
    let penalty = reg.unwrap_or(&SnmfConfig::NONE).coefficients(rows, cols);
    let loss = |w: &Array2<f64>, h: &Array2<f64>| match reg {
        Some(_) => penalized(v, w.view(), h.view(), &penalty),
        None => reconstruction_error(v, w.view(), h.view()),
    };

    let initial_loss = loss(&w, &h);
    let mut trace = Vec::with_capacity(config.max_iters);
    let mut previous = initial_loss;
    for _ in 0..config.max_iters {
        step(v, &mut w, &mut h, &penalty, config.epsilon_guard);
        let current = loss(&w, &h);
        trace.push(current);
        if config.should_stop(previous, current) {
            break;
        }
        previous = current;
    }

    Ok(FactorPair {
        w,
        h,
        initial_loss,
        iterations_run: trace.len(),
        loss_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::seeded_init;
    use ndarray::{array, Array1};

    fn cfg(k: usize, iters: usize, seed: u64) -> FitConfig {
        FitConfig {
            k,
            max_iters: iters,
            rel_tolerance: 0.0,
            seed,
            ..FitConfig::default()
        }
    }

    fn assert_monotone(trace: &[f64], initial: f64) {
        let mut prev = initial;
        for &l in trace {
            assert!(l <= prev * (1.0 + 1e-9), "loss rose from {prev} to {l}");
            prev = l;
        }
    }

    #[test]
    fn exact_factorization_is_a_fixed_point() {
        let w = array![[1.0, 0.5], [0.2, 2.0], [1.0, 1.0]];
        let h = array![[1.0, 0.0, 0.3, 2.0], [0.5, 1.0, 0.0, 0.1]];
        let v = w.dot(&h);
        let before = reconstruction_error(v.view(), w.view(), h.view());
        let (w2, h2) = nmf_update_step(v.view(), w.view(), h.view(), 1e-12);
        let after = reconstruction_error(v.view(), w2.view(), h2.view());
        assert!((after - before).abs() <= 1e-12);
    }

    #[test]
    fn single_step_does_not_increase_loss() {
        let v = seeded_init(10, 8, 1);
        let w = seeded_init(10, 3, 2);
        let h = seeded_init(3, 8, 3);
        let before = reconstruction_error(v.view(), w.view(), h.view());
        let (w2, h2) = nmf_update_step(v.view(), w.view(), h.view(), 1e-12);
        let after = reconstruction_error(v.view(), w2.view(), h2.view());
        assert!(after <= before + 1e-9 * before);
    }

    #[test]
    fn zero_column_stays_zero() {
        let v = seeded_init(6, 5, 4);
        let mut w = seeded_init(6, 3, 5);
        w.column_mut(1).fill(0.0);
        let h = seeded_init(3, 5, 6);
        let (w2, _) = nmf_update_step(v.view(), w.view(), h.view(), 1e-12);
        assert!(w2.column(1).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rank_one_is_recovered() {
        let u = Array1::from_vec(vec![1.0, 2.0, 0.5, 3.0, 1.5]);
        let x = Array1::from_vec(vec![0.2, 1.0, 2.0, 0.7]);
        let v = u
            .view()
            .into_shape_with_order((5, 1))
            .unwrap()
            .dot(&x.view().into_shape_with_order((1, 4)).unwrap());
        let fit = nmf_fit(v.view(), &cfg(1, 500, 9)).unwrap();
        let rel = fit.final_loss().sqrt() / v.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(rel <= 1e-3, "relative error {rel}");
    }

    #[test]
    fn planted_factors_are_recovered() {
        let w0 = seeded_init(20, 3, 100);
        let h0 = seeded_init(3, 30, 101);
        let v = w0.dot(&h0);
        let fit = nmf_fit(v.view(), &cfg(3, 1000, 5)).unwrap();
        let rel = fit.final_loss().sqrt() / v.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(rel <= 0.05, "relative error {rel}");
        assert_monotone(&fit.loss_trace, fit.initial_loss);
    }

    #[test]
    fn zero_matrix_converges_to_zero_loss() {
        let v = Array2::<f64>::zeros((4, 5));
        let fit = nmf_fit(
            v.view(),
            &FitConfig {
                k: 2,
                ..FitConfig::default()
            },
        )
        .unwrap();
        assert_eq!(fit.final_loss(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let v = seeded_init(4, 3, 0);
        assert!(matches!(
            nmf_fit(v.view(), &cfg(4, 10, 0)),
            Err(Error::RankOutOfRange { .. })
        ));
        let mut neg = v.clone();
        neg[[1, 2]] = -0.1;
        assert!(matches!(
            nmf_fit(neg.view(), &cfg(2, 10, 0)),
            Err(Error::NegativeEntry { row: 1, col: 2, .. })
        ));
    }

    #[test]
    fn unregularized_snmf_matches_nmf() {
        let v = seeded_init(12, 9, 77);
        let config = cfg(3, 60, 8);
        let plain = nmf_fit(v.view(), &config).unwrap();
        let sparse = snmf_fit(v.view(), &config, &SnmfConfig::NONE).unwrap();
        assert_eq!(plain.w, sparse.w);
        assert_eq!(plain.h, sparse.h);
        let doubled: Vec<f64> = sparse.loss_trace.iter().map(|l| 2.0 * l).collect();
        assert_eq!(plain.loss_trace, doubled);
    }

    #[test]
    fn snmf_objective_is_monotone() {
        let v = seeded_init(15, 12, 3);
        let reg = SnmfConfig {
            alpha: 0.01,
            beta: 0.005,
            l1_ratio: 0.5,
        };
        let fit = snmf_fit(v.view(), &cfg(4, 200, 1), &reg).unwrap();
        assert_monotone(&fit.loss_trace, fit.initial_loss);
        let last = snmf_objective(v.view(), fit.w.view(), fit.h.view(), &reg);
        assert_eq!(last, fit.final_loss());
    }

    #[test]
    fn l1_penalty_sparsifies_w() {
        let v = seeded_init(30, 40, 11);
        let config = cfg(5, 400, 2);
        let sparsity =
            |m: &Array2<f64>| m.iter().filter(|&&x| x < 1e-6).count() as f64 / m.len() as f64;
        let plain = nmf_fit(v.view(), &config).unwrap();
        let reg = SnmfConfig {
            alpha: 1e-5,
            beta: 0.0,
            l1_ratio: 0.9,
        };
        let sparse = snmf_fit(v.view(), &config, &reg).unwrap();
        assert!(sparsity(&sparse.w) >= sparsity(&plain.w));
    }

    #[test]
    fn l2_penalty_shrinks_w() {
        let v = seeded_init(30, 40, 12);
        let config = cfg(5, 300, 3);
        let norm = |m: &Array2<f64>| m.iter().map(|x| x * x).sum::<f64>().sqrt();
        let plain = nmf_fit(v.view(), &config).unwrap();
        let reg = SnmfConfig {
            alpha: 0.05,
            beta: 0.0,
            l1_ratio: 0.0,
        };
        let shrunk = snmf_fit(v.view(), &config, &reg).unwrap();
        assert!(norm(&shrunk.w) <= norm(&plain.w));
    }

    #[test]
    fn fit_is_deterministic() {
        let v = seeded_init(10, 10, 50);
        let a = nmf_fit(v.view(), &cfg(3, 50, 4)).unwrap();
        let b = nmf_fit(v.view(), &cfg(3, 50, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn abs_threshold_stops_after_first_update() {
        let v = seeded_init(6, 6, 1);
        let config = FitConfig {
            k: 2,
            abs_threshold: f64::INFINITY,
            ..FitConfig::default()
        };
        let fit = nmf_fit(v.view(), &config).unwrap();
        assert_eq!(fit.iterations_run, 1);
    }
}
