use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Cosine similarity between every row of `a` and every row of `b`.
pub fn row_cosines(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let norms = |m: ArrayView2<'_, f64>| -> Vec<f64> {
        m.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect()
    };
    let (na, nb) = (norms(a), norms(b));
    let mut sim = a.dot(&b.t());
    for ((i, j), s) in sim.indexed_iter_mut() {
        let d = na[i] * nb[j];
        *s = if d > 0.0 { *s / d } else { 0.0 };
    }
    sim
}

/// One-to-one matching of baseline topics to perturbed topics maximizing the
/// summed cosine similarity of their feature rows. Entry `i` of the result is
/// the perturbed topic matched to baseline topic `i`.
pub fn align_topics(
    h_base: ArrayView2<'_, f64>,
    h_pert: ArrayView2<'_, f64>,
) -> Result<Vec<usize>> {
    if h_base.dim() != h_pert.dim() {
        return Err(Error::Shape(format!(
            "cannot align {:?} topics with {:?}",
            h_base.dim(),
            h_pert.dim()
        )));
    }
    let sim = row_cosines(h_base, h_pert);
    Ok(min_cost_assignment(sim.mapv(|s| -s).view()))
}

/// Hungarian algorithm (shortest augmenting paths with potentials) on a
/// square cost matrix. Returns `assignment[row] = col`.
pub fn min_cost_assignment(cost: ArrayView2<'_, f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(cost.ncols(), n, "cost matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    // 1-based bookkeeping; column 0 is a virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[[r0 - 1, col - 1]] - u[r0] - v[col];
                if reduced < min_v[col] {
                    min_v[col] = reduced;
                    way[col] = col0;
                }
                if min_v[col] < delta {
                    delta = min_v[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_v[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; n];
    for col in 1..=n {
        assignment[owner[col] - 1] = col - 1;
    }
    assignment
}
