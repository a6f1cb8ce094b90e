//! Brute-force reference computations.
//!
//! Nothing here shares code with the dynamic programs or the streaming
//! estimators it is used to check: paths are enumerated explicitly and moments
//! are computed in two passes.

use crate::field::{Environment, LatticePoint};

/// Calls `visit` with every up/right path from `u` to `v`.
pub fn for_each_path(u: LatticePoint, v: LatticePoint, mut visit: impl FnMut(&[LatticePoint])) {
    if !u.precedes(v) {
        return;
    }
    let mut path = vec![u];
    fn rec(path: &mut Vec<LatticePoint>, v: LatticePoint, visit: &mut dyn FnMut(&[LatticePoint])) {
        let last = *path.last().expect("path starts nonempty");
        if last == v {
            visit(path);
            return;
        }
        if last.x < v.x {
            path.push(LatticePoint::new(last.x + 1, last.y));
            rec(path, v, visit);
            path.pop();
        }
        if last.y < v.y {
            path.push(LatticePoint::new(last.x, last.y + 1));
            rec(path, v, visit);
            path.pop();
        }
    }
    rec(&mut path, v, &mut visit);
}

/// Number of up/right paths from `u` to `v`.
pub fn count_paths(u: LatticePoint, v: LatticePoint) -> u64 {
    let mut n = 0;
    for_each_path(u, v, |_| n += 1);
    n
}

/// Maximum summed weight over all paths from `u` to `v` whose vertices all
/// satisfy `allowed`; `None` when no such path exists.
pub fn max_path_weight<E: Environment>(
    env: &E,
    u: LatticePoint,
    v: LatticePoint,
    allowed: impl Fn(LatticePoint) -> bool,
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for_each_path(u, v, |path| {
        if path.iter().all(|&p| allowed(p)) {
            let w: f64 = path.iter().map(|p| env.weight_at(p.x, p.y)).sum();
            if best.map_or(true, |b| w > b) {
                best = Some(w);
            }
        }
    });
    best
}

/// All maximizing paths (more than one only on exact ties).
pub fn argmax_paths<E: Environment>(env: &E, u: LatticePoint, v: LatticePoint) -> Vec<Vec<LatticePoint>> {
    let mut best = f64::NEG_INFINITY;
    let mut out: Vec<Vec<LatticePoint>> = Vec::new();
    for_each_path(u, v, |path| {
        let w: f64 = path.iter().map(|p| env.weight_at(p.x, p.y)).sum();
        if w > best {
            best = w;
            out.clear();
            out.push(path.to_vec());
        } else if w == best {
            out.push(path.to_vec());
        }
    });
    out
}

/// Two-pass sample means and covariance matrix (divisor `n - 1`).
pub fn two_pass_covariance(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = vec![vec![0.0; dim]; dim];
    for r in rows {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    let denom = (n as f64 - 1.0).max(1.0);
    for row in &mut cov {
        for c in row.iter_mut() {
            *c /= denom;
        }
    }
    (mean, cov)
}

/// Unweighted least-squares slope and intercept of `ys` on `xs`.
pub fn ols_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Deterministic standard normals from a SplitMix64 stream (Box–Muller),
/// for synthetic-data checks that must not depend on the lattice generator.
pub struct NormalStream {
    state: u64,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let (u1, u2) = (self.uniform(), self.uniform());
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_counts_are_binomial() {
        assert_eq!(count_paths(LatticePoint::ORIGIN, LatticePoint::new(3, 3)), 20);
        assert_eq!(count_paths(LatticePoint::ORIGIN, LatticePoint::ORIGIN), 1);
        assert_eq!(count_paths(LatticePoint::new(1, 1), LatticePoint::new(3, 2)), 3);
        assert_eq!(count_paths(LatticePoint::new(2, 0), LatticePoint::new(1, 3)), 0);
    }

    #[test]
    fn two_pass_on_two_points() {
        let (mean, cov) = two_pass_covariance(&[vec![0.0, 0.0], vec![2.0, 2.0]]);
        assert_eq!(mean, vec![1.0, 1.0]);
        assert_eq!(cov[0][1], 2.0);
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut g = NormalStream::new(1);
        let xs: Vec<f64> = (0..100_000).map(|_| g.normal()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 0.02 && (v - 1.0).abs() < 0.02);
    }
}
