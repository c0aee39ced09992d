//! Frobenius NMF and elastic-net sparse NMF on a planted low-rank matrix.

use dyntopic::factor::{
    nmf_fit, reconstruction_error, seeded_init, snmf_fit, FitConfig, SnmfConfig,
};

fn main() -> dyntopic::Result<()> {
    let w0 = seeded_init(40, 3, 11);
    let h0 = seeded_init(3, 60, 12);
    let v = w0.dot(&h0);
    let config = FitConfig {
        k: 3,
        max_iters: 1000,
        rel_tolerance: 1e-9,
        ..FitConfig::default()
    };

    let plain = nmf_fit(v.view(), &config)?;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let err = reconstruction_error(v.view(), plain.w.view(), plain.h.view()).sqrt() / norm;
    println!(
        "nmf: {} iterations, loss {:.3e} -> {:.3e}, relative error {err:.2e}",
        plain.iterations_run,
        plain.initial_loss,
        plain.final_loss()
    );

    for l1_ratio in [0.0, 0.5, 1.0] {
        let reg = SnmfConfig {
            alpha: 0.05,
            beta: 0.0,
            l1_ratio,
        };
        let sparse = snmf_fit(v.view(), &config, &reg)?;
        let zeros = sparse.w.iter().filter(|&&x| x < 1e-6).count();
        println!(
            "snmf l1_ratio={l1_ratio}: objective {:.4e}, {zeros} of {} W entries below 1e-6",
            sparse.final_loss(),
            sparse.w.len()
        );
    }
    Ok(())
}
