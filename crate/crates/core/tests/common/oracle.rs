//! Reference solver for the bias-augmented L2-regularized hinge-loss SVM.
//!
//! Accelerated projected gradient (FISTA with adaptive restart) on the
//! box-constrained dual, using dense matrices. Runs until the duality gap
//! falls below the requested bound, so its primal value is certified.

pub struct OracleSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub primal: f64,
    pub dual: f64,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 2_000_000;

/// `rows` are dense feature rows, `ys` are ±1.
pub fn solve(rows: &[Vec<f64>], ys: &[f64], c: f64, max_gap: f64) -> OracleSolution {
    let n = rows.len();
    let d = rows[0].len();
    // Augmented rows z_i = y_i [x_i; 1]
    let z: Vec<Vec<f64>> = rows
        .iter()
        .zip(ys)
        .map(|(r, &y)| r.iter().chain(std::iter::once(&1.0)).map(|v| y * v).collect())
        .collect();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = z[i].iter().zip(&z[j]).map(|(a, b)| a * b).sum();
        }
    }
    let lipschitz = q
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = 1.0 / lipschitz;

    let dual_min = |a: &[f64]| -> f64 {
        let qa: Vec<f64> = q.iter().map(|r| r.iter().zip(a).map(|(x, y)| x * y).sum()).collect();
        0.5 * a.iter().zip(&qa).map(|(x, y)| x * y).sum::<f64>() - a.iter().sum::<f64>()
    };
    let primal_of = |a: &[f64]| -> (Vec<f64>, f64) {
        let mut w = vec![0.0; d + 1];
        for (ai, zi) in a.iter().zip(&z) {
            for (wk, zk) in w.iter_mut().zip(zi) {
                *wk += ai * zk;
            }
        }
        let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        let loss: f64 = z
            .iter()
            .map(|zi| (1.0 - zi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()).max(0.0))
            .sum();
        (w, reg + c * loss)
    };

    let mut alpha = vec![0.0; n];
    let mut y = alpha.clone();
    let mut t = 1.0f64;
    let mut f_prev = dual_min(&alpha);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let grad: Vec<f64> = q
            .iter()
            .map(|r| r.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() - 1.0)
            .collect();
        let next: Vec<f64> = y.iter().zip(&grad).map(|(v, g)| (v - step * g).clamp(0.0, c)).collect();
        let f_next = dual_min(&next);
        if f_next > f_prev && t > 1.0 {
            // Restart momentum. A plain projected step (t == 1) is accepted
            // as is, since near the optimum rounding alone can make it look
            // like an increase.
            y = alpha.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        y = next
            .iter()
            .zip(&alpha)
            .map(|(a, b)| (a + beta * (a - b)).clamp(0.0, c))
            .collect();
        alpha = next;
        t = t_next;
        f_prev = f_next;

        if iterations % 50 == 0 || iterations >= MAX_ITERATIONS {
            let (w, primal) = primal_of(&alpha);
            let dual = -f_next;
            if primal - dual <= max_gap || iterations >= MAX_ITERATIONS {
                return OracleSolution {
                    bias: w[d],
                    weights: w[..d].to_vec(),
                    primal,
                    dual,
                    iterations,
                };
            }
        }
    }
}
