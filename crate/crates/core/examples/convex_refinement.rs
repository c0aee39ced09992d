//! Expresses an NMF basis through non-negative combinations of the data
//! columns (NNLS) and refines the result with convex NMF.

use dyntopic::factor::{
    cnmf_fit, convex_objective, nmf_fit, nnls_fixed_basis, seeded_init, FitConfig,
};
use ndarray::Array2;

fn main() -> dyntopic::Result<()> {
    let v = seeded_init(12, 50, 3);
    let config = FitConfig {
        k: 4,
        max_iters: 500,
        rel_tolerance: 1e-9,
        ..FitConfig::default()
    };
    let nmf = nmf_fit(v.view(), &config)?;

    let mut g = Array2::zeros((v.ncols(), config.k));
    for (j, w_col) in nmf.w.columns().into_iter().enumerate() {
        let solution = nnls_fixed_basis(v.view(), w_col);
        println!(
            "column {j}: residual {:.3e}, KKT residual {:.1e}",
            solution.objective, solution.kkt_residual
        );
        g.column_mut(j).assign(&solution.coefficients);
    }
    let start = convex_objective(v.view(), g.view(), nmf.h.view());
    let convex = cnmf_fit(v.view(), g.view(), nmf.h.view(), &config)?;
    println!(
        "convex NMF: objective {start:.4e} at the NNLS start, {:.4e} after {} iterations",
        convex.final_loss(),
        convex.iterations_run
    );
    let max_gap = (&convex.w_tilde - &v.dot(&convex.g))
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    println!("basis equals V G to within {max_gap:.1e}");
    Ok(())
}
