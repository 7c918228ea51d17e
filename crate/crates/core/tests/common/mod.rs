#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Discrete minimax fit of degree `deg` in the Chebyshev basis of `[lo, hi]`
/// on the points `xs`, by a dense two-phase simplex on the dual problem
///
/// ```text
/// max sum_i f_i (u_i - v_i)
/// s.t. sum_i T_j(t_i) (u_i - v_i) = 0   (j = 0..deg)
///      sum_i (u_i + v_i) = 1,  u, v >= 0.
/// ```
///
/// The multipliers of the optimal basis are the coefficients of the best
/// polynomial and the discrete error.
pub struct LpFit {
    pub error: f64,
    pub coeffs: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl LpFit {
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        cheb(t, self.coeffs.len()).iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }
}

fn cheb(t: f64, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for j in 0..n {
        v[j] = match j {
            0 => 1.0,
            1 => t,
            _ => 2.0 * t * v[j - 1] - v[j - 2],
        };
    }
    v
}

pub fn lp_minimax(f: impl Fn(f64) -> f64, lo: f64, hi: f64, deg: usize, xs: &[f64]) -> LpFit {
    let n_pts = xs.len();
    let m = deg + 2;
    let nvar = 2 * n_pts;
    // columns: u_0..u_{N-1}, v_0..v_{N-1}, artificials a_0..a_{m-1}
    let ncol = nvar + m;
    let mut a = vec![vec![0.0; ncol + 1]; m];
    let mut cost = vec![0.0; ncol];
    for (i, &x) in xs.iter().enumerate() {
        let t = (2.0 * x - lo - hi) / (hi - lo);
        let row = cheb(t, deg + 1);
        for j in 0..=deg {
            a[j][i] = row[j];
            a[j][n_pts + i] = -row[j];
        }
        a[deg + 1][i] = 1.0;
        a[deg + 1][n_pts + i] = 1.0;
        let fx = f(x);
        cost[i] = fx;
        cost[n_pts + i] = -fx;
    }
    let original: Vec<Vec<f64>> = a.iter().map(|r| r[..nvar].to_vec()).collect();
    for r in 0..m {
        a[r][nvar + r] = 1.0;
    }
    a[deg + 1][ncol] = 1.0;
    let mut basis: Vec<usize> = (nvar..ncol).collect();

    // phase one: maximize -sum(artificials)
    let phase1: Vec<f64> = (0..ncol).map(|c| if c >= nvar { -1.0 } else { 0.0 }).collect();
    simplex(&mut a, &mut basis, &phase1, ncol);
    // drive remaining artificials out of the basis where possible
    for r in 0..m {
        if basis[r] >= nvar {
            if let Some(c) = (0..nvar).find(|&c| a[r][c].abs() > 1e-9) {
                pivot(&mut a, r, c);
                basis[r] = c;
            }
        }
    }
    // phase two, artificials barred from entering
    simplex(&mut a, &mut basis, &cost, nvar);

    // multipliers: B^T pi = c_B
    let mut bt = vec![vec![0.0; m + 1]; m];
    for (r, &col) in basis.iter().enumerate() {
        for j in 0..m {
            bt[r][j] = if col < nvar { original[j][col] } else if col - nvar == j { 1.0 } else { 0.0 };
        }
        bt[r][m] = if col < nvar { cost[col] } else { 0.0 };
    }
    let pi = gauss(bt);
    LpFit {
        error: pi[deg + 1],
        coeffs: pi[..=deg].to_vec(),
        lo,
        hi,
    }
}

fn pivot(a: &mut [Vec<f64>], r: usize, c: usize) {
    let p = a[r][c];
    for v in a[r].iter_mut() {
        *v /= p;
    }
    let prow = a[r].clone();
    for (i, row) in a.iter_mut().enumerate() {
        if i != r {
            let factor = row[c];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= factor * pv;
                }
            }
        }
    }
}

/// Maximizes `cost . x` over columns `< allowed`. Dantzig pricing; the
/// ratio test prefers the larger pivot among near ties.
fn simplex(a: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) {
    let m = a.len();
    let rhs = a[0].len() - 1;
    for _ in 0..100_000 {
        let mut enter: Option<(usize, f64)> = None;
        for c in 0..allowed {
            if basis.contains(&c) {
                continue;
            }
            let reduced = cost[c] - (0..m).map(|r| cost[basis[r]] * a[r][c]).sum::<f64>();
            if reduced > 1e-11 && enter.map_or(true, |(_, best)| reduced > best) {
                enter = Some((c, reduced));
            }
        }
        let Some((c, _)) = enter else { return };
        let min_ratio = (0..m)
            .filter(|&r| a[r][c] > 1e-9)
            .map(|r| a[r][rhs].max(0.0) / a[r][c])
            .fold(f64::INFINITY, f64::min);
        assert!(min_ratio.is_finite(), "dual LP is bounded");
        let r = (0..m)
            .filter(|&r| a[r][c] > 1e-9 && a[r][rhs].max(0.0) / a[r][c] <= min_ratio + 1e-12)
            .max_by(|&x, &y| a[x][c].partial_cmp(&a[y][c]).unwrap())
            .unwrap();
        pivot(a, r, c);
        basis[r] = c;
    }
    panic!("simplex did not terminate");
}

fn gauss(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..=n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    x
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

pub fn q(p: i64, r: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(r))
}

/// `int |g|` for the piecewise linear `g` with `g(l) = values[l - first]`
/// at consecutive integers and zero beyond, exactly.
pub fn piecewise_linear_l1(values: &[BigRational]) -> BigRational {
    let mut padded = vec![BigRational::zero()];
    padded.extend_from_slice(values);
    padded.push(BigRational::zero());
    let two = q(2, 1);
    padded
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if (a.is_negative() && b.is_positive()) || (a.is_positive() && b.is_negative()) {
                // the segment crosses zero
                (a * a + b * b) / (&two * (a.abs() + b.abs()))
            } else {
                (a.abs() + b.abs()) / &two
            }
        })
        .fold(BigRational::zero(), |acc, v| acc + v)
}

/// `C(n, r)` as an exact integer.
pub fn binom(n: u64, r: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 0..r {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}
