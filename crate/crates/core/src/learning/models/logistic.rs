use super::{argmax, NUM_CLASSES};
use crate::learning::dataset::Matrix;

const TOLERANCE: f64 = 1e-6;
const MAX_EPOCHS: usize = 1000;

/// Multinomial softmax regression on standardized inputs.
///
/// Minimizes `(1/n) * (sum of cross-entropies + l2/2 * |W|^2)`; the
/// intercepts are not penalized. Optimized by L-BFGS until the largest
/// gradient component drops below 1e-6 or 1000 iterations pass.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `weights[c]` holds the d coefficients of class c followed by its intercept.
    weights: Vec<Vec<f64>>,
    epochs: usize,
}

impl LogisticRegression {
    pub fn fit(x: &Matrix, y: &[usize], l2: f64) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let mut mean = vec![0.0; d];
        let mut scale = vec![0.0; d];
        for i in 0..n {
            for (j, v) in x.row(i).iter().enumerate() {
                mean[j] += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        for i in 0..n {
            for (j, v) in x.row(i).iter().enumerate() {
                scale[j] += (v - mean[j]).powi(2);
            }
        }
        for s in &mut scale {
            let sd = (*s / n as f64).sqrt();
            *s = if sd > 0.0 { sd } else { 1.0 };
        }
        let z: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r: Vec<f64> = x
                    .row(i)
                    .iter()
                    .zip(mean.iter().zip(&scale))
                    .map(|(v, (m, s))| (v - m) / s)
                    .collect();
                r.push(1.0);
                r
            })
            .collect();

        let width = d + 1;
        let flat: Vec<f64> = z.into_iter().flatten().collect();
        let objective = |w: &[f64], g: &mut [f64]| -> f64 {
            g.iter_mut().for_each(|v| *v = 0.0);
            let mut loss = 0.0;
            for (row, &label) in flat.chunks_exact(width).zip(y) {
                let mut logits = [0.0; NUM_CLASSES];
                for (c, l) in logits.iter_mut().enumerate() {
                    *l = dot(&w[c * width..(c + 1) * width], row);
                }
                let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
                loss += lse - logits[label];
                for (c, l) in logits.iter().enumerate() {
                    let p = (l - lse).exp() - if c == label { 1.0 } else { 0.0 };
                    for (gj, rj) in g[c * width..(c + 1) * width].iter_mut().zip(row) {
                        *gj += p * rj;
                    }
                }
            }
            for c in 0..NUM_CLASSES {
                for j in 0..d {
                    let wj = w[c * width + j];
                    loss += 0.5 * l2 * wj * wj;
                    g[c * width + j] += l2 * wj;
                }
            }
            g.iter_mut().for_each(|v| *v /= n as f64);
            loss / n as f64
        };
        let (w, epochs) = lbfgs(objective, NUM_CLASSES * width);
        let w: Vec<Vec<f64>> = w.chunks_exact(width).map(<[f64]>::to_vec).collect();

        LogisticRegression {
            mean,
            scale,
            weights: w,
            epochs,
        }
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn probabilities(&self, row: &[f64]) -> [f64; NUM_CLASSES] {
        let logits: Vec<f64> = self.weights.iter().map(|w| self.logit(w, row)).collect();
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = e.iter().sum();
        [e[0] / s, e[1] / s, e[2] / s]
    }

    fn logit(&self, w: &[f64], row: &[f64]) -> f64 {
        let d = self.mean.len();
        let mut acc = w[d];
        for j in 0..d {
            acc += w[j] * (row[j] - self.mean[j]) / self.scale[j];
        }
        acc
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let logits: Vec<f64> = self.weights.iter().map(|w| self.logit(w, row)).collect();
        argmax(&logits)
    }
}

const MEMORY: usize = 10;

/// Limited-memory BFGS with Armijo backtracking. Returns the minimizer and
/// the number of iterations used.
fn lbfgs<F: Fn(&[f64], &mut [f64]) -> f64>(f: F, dim: usize) -> (Vec<f64>, usize) {
    let mut x = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut fx = f(&x, &mut g);
    let mut history: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> =
        std::collections::VecDeque::with_capacity(MEMORY);
    let mut x_new = vec![0.0; dim];
    let mut g_new = vec![0.0; dim];
    let mut iter = 0;
    while iter < MAX_EPOCHS {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < TOLERANCE {
            break;
        }
        iter += 1;
        // Two-loop recursion for the search direction.
        let mut q: Vec<f64> = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(yv) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, yv, _)) = history.back() {
            let gamma = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, yv, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(yv, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }
        let mut step = if history.is_empty() {
            1.0 / g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0)
        } else {
            1.0
        };
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..dim {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = f(&x_new, &mut g_new);
            if f_new <= fx + 1e-4 * step * slope {
                let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &yv);
                if sy > 1e-12 {
                    if history.len() == MEMORY {
                        history.pop_front();
                    }
                    history.push_back((s, yv, 1.0 / sy));
                }
                let stalled = fx - f_new <= 1e-15 * fx.abs().max(1.0);
                std::mem::swap(&mut x, &mut x_new);
                std::mem::swap(&mut g, &mut g_new);
                fx = f_new;
                accepted = !stalled;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, iter)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
