/// (min, Q25, Q50, Q75, max) with linear interpolation between order
/// statistics at position `(n - 1) * q`. An empty input yields zeros.
pub fn quantiles5(values: &[usize]) -> [f64; 5] {
    let mut v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    quantiles5_sorted(&v)
}

pub(crate) fn quantiles5_sorted(sorted: &[f64]) -> [f64; 5] {
    if sorted.is_empty() {
        return [0.0; 5];
    }
    let n = sorted.len();
    [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| {
        let h = (n - 1) as f64 * q;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    })
}
