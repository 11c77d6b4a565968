//! Small dense polynomials: univariate over f64 and bivariate with degree at
//! most 3 in each variable — exactly what the concurrency elimination needs.

use crate::error::{Error, Result};

/// Univariate polynomial, coefficients ascending by degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Trims trailing coefficients that are negligible against the largest.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    fn trim(&mut self) {
        let max = self.max_abs_coeff();
        let tol = if max > 0.0 { max * 1e-14 } else { 0.0 };
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.abs() <= tol) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs_coeff() == 0.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Upper bound on the evaluation magnitude at `x` (sum of |c_k||x|^k);
    /// used for relative near-zero decisions.
    pub fn eval_magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * ax + c.abs();
        }
        acc
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Polynomial::new(out)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Rescales coefficients to unit max-norm.
    pub fn normalized(&self) -> Polynomial {
        let max = self.max_abs_coeff();
        if max == 0.0 {
            return self.clone();
        }
        self.scale(1.0 / max)
    }
}

/// Bivariate polynomial over (u, v) with degree at most 3 in each variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariatePoly {
    /// c[i][j] multiplies u^i v^j.
    pub c: [[f64; 4]; 4],
}

impl BivariatePoly {
    pub fn zero() -> Self {
        Self { c: [[0.0; 4]; 4] }
    }

    pub fn constant(k: f64) -> Self {
        let mut p = Self::zero();
        p.c[0][0] = k;
        p
    }

    pub fn degree_u(&self) -> usize {
        (0..4)
            .rev()
            .find(|&i| (0..4).any(|j| self.c[i][j] != 0.0))
            .unwrap_or(0)
    }

    pub fn degree_v(&self) -> usize {
        (0..4)
            .rev()
            .find(|&j| (0..4).any(|i| self.c[i][j] != 0.0))
            .unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.c[i][j] = self.c[i][j] + other.c[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.c[i][j] = self.c[i][j] - other.c[i][j];
            }
        }
        out
    }

    /// Product; the combined degrees must stay within 3 per variable, which
    /// holds for every product the concurrency construction forms.
    pub fn mul(&self, other: &Self) -> Self {
        let du = self.degree_u() + other.degree_u();
        let dv = self.degree_v() + other.degree_v();
        debug_assert!(du <= 3 && dv <= 3, "bivariate degree overflow ({du},{dv})");
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                let a = self.c[i][j];
                if a == 0.0 {
                    continue;
                }
                for k in 0..(4 - i) {
                    for l in 0..(4 - j) {
                        out.c[i + k][j + l] += a * other.c[k][l];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for row in out.c.iter_mut() {
            for c in row.iter_mut() {
                *c *= k;
            }
        }
        out
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        // Horner in u of Horner-in-v rows
        let mut acc = 0.0;
        for i in (0..4).rev() {
            let row = self.c[i];
            let r = ((row[3] * v + row[2]) * v + row[1]) * v + row[0];
            acc = acc * u + r;
        }
        acc
    }

    /// Coefficient of v^j, as a polynomial in u (degree <= 3).
    pub fn v_coefficient(&self, j: usize) -> Polynomial {
        Polynomial::new((0..4).map(|i| self.c[i][j]).collect())
    }
}

/// Scans [lo, hi] with the given step, returning ascending sign-change
/// brackets (including exact zeros at grid points as zero-width brackets)
/// and the smallest finite |f| seen with its location. Non-finite values
/// break the bracket chain instead of producing brackets.
pub fn scan_fn_brackets(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    step: f64,
) -> (Vec<(f64, f64)>, (f64, f64)) {
    let n_steps = (((hi - lo) / step).ceil() as usize).max(1);
    let mut brackets = Vec::new();
    let mut min_abs = f64::INFINITY;
    let mut min_at = lo;
    let mut prev: Option<(f64, f64)> = None;
    for idx in 0..=n_steps {
        let x = if idx == n_steps {
            hi
        } else {
            lo + idx as f64 * step
        };
        let v = f(x);
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if v == 0.0 {
            brackets.push((x, x));
        } else if let Some((px, pv)) = prev {
            if pv != 0.0 && (pv < 0.0) != (v < 0.0) {
                brackets.push((px, x));
            }
        }
        if v.abs() < min_abs {
            min_abs = v.abs();
            min_at = x;
        }
        prev = Some((x, v));
    }
    (brackets, (min_abs, min_at))
}

/// Bisection refinement of a sign-change bracket down to width 1e-13.
pub fn bisect_fn_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_lo < 0.0) != (f_mid < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
        if hi - lo <= 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// All sign-change roots of an evaluator on [lo, hi], ascending, refined by
/// bisection; near-coincident roots deduplicated.
pub fn scan_fn_roots(
    f: impl Fn(f64) -> f64 + Copy,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Vec<f64>> {
    let valid = step.is_finite() && step > 0.0 && lo.is_finite() && hi.is_finite() && hi > lo;
    if !valid {
        return Err(Error::InvalidInput(
            "scan interval must be finite with positive step".into(),
        ));
    }
    let (brackets, (min_abs, min_at)) = scan_fn_brackets(f, lo, hi, step);
    if brackets.is_empty() {
        return Err(Error::NoRootInInterval {
            lo,
            hi,
            min_abs,
            at: min_at,
        });
    }
    let mut roots: Vec<f64> = brackets
        .iter()
        .map(|&(a, b)| bisect_fn_root(f, a, b))
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    Ok(roots)
}

/// All sign-change roots of `p` on [lo, hi], ascending, refined to 1e-12.
pub fn scan_roots(p: &Polynomial, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    scan_fn_roots(|x| p.eval(x), lo, hi, step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_trim() {
        let p = Polynomial::new(vec![1.0, -2.0, 1.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(3.0), 4.0);
    }

    #[test]
    fn mul_matches_hand_product() {
        // (1 + x)(1 - x) = 1 - x^2
        let a = Polynomial::new(vec![1.0, 1.0]);
        let b = Polynomial::new(vec![1.0, -1.0]);
        assert_eq!(a.mul(&b).coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn sqrt_two_via_scan() {
        let p = Polynomial::new(vec![-2.0, 0.0, 1.0]);
        let roots = scan_roots(&p, 0.0, 2.0, 0.01).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tangency_reports_no_root_with_near_zero_minimum() {
        // (x-1)^2 touches zero without a sign change; the step is chosen so
        // the grid does not land exactly on the tangency point
        let p = Polynomial::new(vec![1.0, -2.0, 1.0]);
        match scan_roots(&p, 0.0, 2.0, 0.013) {
            Err(Error::NoRootInInterval { min_abs, at, .. }) => {
                assert!(min_abs < 1e-3);
                assert!((at - 1.0).abs() < 0.02);
            }
            other => panic!("expected NoRootInInterval, got {other:?}"),
        }
        // a grid point exactly on a root still counts as a root
        let roots = scan_roots(&p, 0.0, 2.0, 0.01).unwrap();
        assert_eq!(roots, vec![1.0]);
    }

    #[test]
    fn bivariate_eval_and_mul_agree() {
        let mut a = BivariatePoly::zero();
        a.c[0][0] = 1.0;
        a.c[1][1] = 2.0;
        let mut b = BivariatePoly::zero();
        b.c[1][0] = -1.0;
        b.c[0][1] = 3.0;
        let prod = a.mul(&b);
        let (u, v) = (0.7, -1.3);
        assert!((prod.eval(u, v) - a.eval(u, v) * b.eval(u, v)).abs() < 1e-12);
    }

    #[test]
    fn v_coefficient_extraction() {
        let mut a = BivariatePoly::zero();
        a.c[2][3] = 5.0;
        a.c[0][3] = -1.0;
        let c3 = a.v_coefficient(3);
        assert_eq!(c3.coeffs(), &[-1.0, 0.0, 5.0]);
    }
}
