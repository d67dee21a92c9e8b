//! Brute-force reference implementations for the test suites.
//!
//! Everything here is deliberately slow and literal. Nothing in this crate
//! depends on `cam-edit-core`; inputs and outputs are plain slices and tuples
//! so that an agreement between an oracle and the production path is
//! meaningful.

/// Quadruple-loop correlation (no kernel flip) with replicate padding.
///
/// The kernel is `kw` wide and `kh` tall, stored row-major. `(ax, ay)` is the
/// kernel cell that lands on the output pixel.
pub fn naive_correlate(
    data: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
    kw: usize,
    kh: usize,
    ax: usize,
    ay: usize,
) -> Vec<f64> {
    assert_eq!(data.len(), width * height);
    assert_eq!(kernel.len(), kw * kh);
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for j in 0..kh {
                for i in 0..kw {
                    let sy = y as i64 + j as i64 - ay as i64;
                    let sx = x as i64 + i as i64 - ax as i64;
                    let sy = sy.max(0).min(height as i64 - 1) as usize;
                    let sx = sx.max(0).min(width as i64 - 1) as usize;
                    acc += kernel[j * kw + i] * data[sy * width + sx];
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Counts ordered pairs of distinct points into the four displacement cells
/// `(a, b, c, d)`.
pub fn pair_table(points: &[(i64, i64)], k: i64) -> (u64, u64, u64, u64) {
    let (mut a, mut b, mut c, mut d) = (0, 0, 0, 0);
    for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let dx = (p.0 - q.0).abs();
            let dy = (p.1 - q.1).abs();
            match (dx <= k, dy <= k) {
                (true, true) => a += 1,
                (true, false) => b += 1,
                (false, true) => c += 1,
                (false, false) => d += 1,
            }
        }
    }
    (a, b, c, d)
}

/// Exact binomial coefficient in 128-bit integers. Panics on overflow.
pub fn binomial_exact(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r
            .checked_mul((n - i) as u128)
            .expect("binomial overflow in oracle")
            / (i as u128 + 1);
    }
    r
}

/// All 2x2 tables with row sums `(r1, r2)` and first column sum `c1`, with
/// their hypergeometric point probabilities computed from exact integers.
///
/// Returns `None` when the margins are infeasible.
pub fn enumerate_tables(r1: u64, r2: u64, c1: u64) -> Option<Vec<((u64, u64, u64, u64), f64)>> {
    let n = r1 + r2;
    if c1 > n {
        return None;
    }
    let denom = binomial_exact(n, c1);
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let mut out = Vec::new();
    for a in lo..=hi {
        let b = r1 - a;
        let c = c1 - a;
        let d = r2 - c;
        let num = binomial_exact(r1, a) * binomial_exact(r2, c);
        out.push(((a, b, c, d), num as f64 / denom as f64));
    }
    Some(out)
}

fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for i in 1..=n {
        t[i] = t[i - 1] + (i as f64).ln();
    }
    t
}

/// Hypergeometric point probability using a summed log-factorial table.
pub fn fisher_point(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let n = (a + b + c + d) as usize;
    let lf = ln_factorial_table(n);
    let f = |x: u64| lf[x as usize];
    let ln_p = f(a + b) + f(c + d) + f(a + c) + f(b + d) - f(a) - f(b) - f(c) - f(d) - lf[n];
    ln_p.exp()
}

/// Pearson statistic written out cell by cell.
pub fn chi_square_statistic(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let n = a + b + c + d;
    let e = [
        (a + b) * (a + c) / n,
        (a + b) * (b + d) / n,
        (c + d) * (a + c) / n,
        (c + d) * (b + d) / n,
    ];
    let o = [a, b, c, d];
    (0..4).map(|i| (o[i] - e[i]).powi(2) / e[i]).sum()
}

/// Upper tail of the chi-square distribution with one degree of freedom by
/// composite Simpson integration of the Gaussian density.
pub fn chi_square_sf_df1(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let z = (x / 2.0).sqrt();
    if z > 9.0 {
        return 0.0;
    }
    let steps = 20_000;
    let h = z / steps as f64;
    let f = |t: f64| (-t * t).exp();
    let mut s = f(0.0) + f(z);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    let erf = 2.0 / std::f64::consts::PI.sqrt() * s * h / 3.0;
    (1.0 - erf).max(0.0)
}

fn oracle_p_value(t: (u64, u64, u64, u64)) -> f64 {
    let (a, b, c, d) = t;
    if a < 5 || b < 5 || c < 5 || d < 5 {
        fisher_point(a, b, c, d)
    } else {
        chi_square_sf_df1(chi_square_statistic(a, b, c, d))
    }
}

fn axis_origins(dim: usize, window: usize, stride: usize) -> Vec<usize> {
    if window >= dim {
        return vec![0];
    }
    let last = dim - window;
    let steps = (last + stride - 1) / stride;
    let mut v: Vec<usize> = (0..=steps).map(|s| (s * stride).min(last)).collect();
    v.dedup();
    v
}

/// Literal re-execution of the window sweep and union keep-rule.
#[allow(clippy::too_many_arguments)]
pub fn edit_replay(
    bits: &[bool],
    width: usize,
    height: usize,
    window: usize,
    stride: usize,
    k: i64,
    alpha: f64,
    min_points: usize,
) -> Vec<bool> {
    let mut keep = vec![false; width * height];
    let ww = window.min(width);
    let wh = window.min(height);
    for oy in axis_origins(height, window, stride) {
        for ox in axis_origins(width, window, stride) {
            let mut pts = Vec::new();
            for y in oy..oy + wh {
                for x in ox..ox + ww {
                    if bits[y * width + x] {
                        pts.push(((x - ox) as i64, (y - oy) as i64));
                    }
                }
            }
            if pts.len() < min_points {
                continue;
            }
            let p = oracle_p_value(pair_table(&pts, k));
            if p < alpha {
                for (x, y) in pts {
                    keep[(y as usize + oy) * width + x as usize + ox] = true;
                }
            }
        }
    }
    bits.iter().zip(&keep).map(|(&b, &k)| b && k).collect()
}

/// Maximum-cardinality matching between two point sets where an edge exists
/// when the Euclidean distance is at most `tol`. Simple augmenting-path search.
pub fn max_matching(pred: &[(i64, i64)], gt: &[(i64, i64)], tol: f64) -> usize {
    let adj: Vec<Vec<usize>> = pred
        .iter()
        .map(|p| {
            gt.iter()
                .enumerate()
                .filter(|(_, g)| {
                    let dx = (p.0 - g.0) as f64;
                    let dy = (p.1 - g.1) as f64;
                    (dx * dx + dy * dy).sqrt() <= tol
                })
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; gt.len()];
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none() || augment(owner[v].unwrap(), adj, seen, owner) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut count = 0;
    for u in 0..pred.len() {
        let mut seen = vec![false; gt.len()];
        if augment(u, &adj, &mut seen, &mut owner) {
            count += 1;
        }
    }
    count
}
