/// Euclidean projection of `v` onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    let mut q: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    let s: f64 = q.iter().sum();
    if s > 0.0 {
        q.iter_mut().for_each(|x| *x /= s);
    }
    q
}
