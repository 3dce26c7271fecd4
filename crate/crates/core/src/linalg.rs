//! Small dense kernels used by the partitioned-box eigensolver.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::num::Real;

/// Dense symmetric matrix, row-major, both triangles stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }
}

/// Counts of negative, zero and positive eigenvalues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

#[derive(Clone, Copy, Debug)]
enum Pivot<T> {
    One(T),
    Two(T, T, T),
}

/// Bunch–Kaufman factorization `P A P^T = L D L^T` with 1x1 and 2x2 pivots.
///
/// Gives the inertia of `A` (Sylvester) and its determinant as sign and
/// log-magnitude, both of which stay well defined for indefinite matrices.
#[derive(Clone, Debug)]
pub struct BunchKaufman<T> {
    n: usize,
    /// Unit lower-triangular factor, row-major.
    l: Vec<T>,
    pivots: Vec<Pivot<T>>,
    /// `perm[k]` is the original row placed at position `k`.
    perm: Vec<usize>,
}

impl<T: Real> BunchKaufman<T> {
    pub fn factor(a: &SymMatrix<T>) -> Self {
        let n = a.n;
        let mut w = a.data.clone();
        let mut l = vec![T::zero(); n * n];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::with_capacity(n);
        let alpha = (T::one() + T::lit(17.0).sqrt()) / T::lit(8.0);

        // symmetric interchange of rows/cols r and s (both >= k) in the
        // trailing block, plus the already computed rows of L
        let swap = |w: &mut Vec<T>, l: &mut Vec<T>, perm: &mut Vec<usize>, k: usize, r: usize, s: usize| {
            if r == s {
                return;
            }
            for c in k..n {
                w.swap(r * n + c, s * n + c);
            }
            for c in k..n {
                w.swap(c * n + r, c * n + s);
            }
            for c in 0..k {
                l.swap(r * n + c, s * n + c);
            }
            perm.swap(r, s);
        };

        let mut k = 0;
        while k < n {
            let akk = w[k * n + k].abs();
            let (imax, colmax) = ((k + 1)..n)
                .map(|i| (i, w[i * n + k].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });

            let mut two_by_two = false;
            if akk.max(colmax) == T::zero() {
                // zero column: 1x1 zero pivot, nothing to eliminate
            } else if akk >= alpha * colmax {
                // keep k
            } else {
                let rowmax = (k..n)
                    .filter(|&j| j != imax)
                    .map(|j| w[imax * n + j].abs())
                    .fold(T::zero(), T::max);
                if akk * rowmax >= alpha * colmax * colmax {
                    // keep k
                } else if w[imax * n + imax].abs() >= alpha * rowmax {
                    swap(&mut w, &mut l, &mut perm, k, k, imax);
                } else {
                    swap(&mut w, &mut l, &mut perm, k, k + 1, imax);
                    two_by_two = true;
                }
            }

            l[k * n + k] = T::one();
            if !two_by_two {
                let d = w[k * n + k];
                pivots.push(Pivot::One(d));
                if d != T::zero() {
                    for i in (k + 1)..n {
                        l[i * n + k] = w[i * n + k] / d;
                    }
                    // full-square rank-one update on contiguous rows keeps
                    // the trailing block symmetric without a mirror pass
                    let lk: Vec<T> = ((k + 1)..n).map(|j| l[j * n + k]).collect();
                    for i in (k + 1)..n {
                        let wik = w[i * n + k];
                        if wik == T::zero() {
                            continue;
                        }
                        let row = &mut w[i * n + k + 1..(i + 1) * n];
                        for (x, &lj) in row.iter_mut().zip(&lk) {
                            *x = *x - wik * lj;
                        }
                    }
                }
                k += 1;
            } else {
                let a = w[k * n + k];
                let b = w[(k + 1) * n + k];
                let c = w[(k + 1) * n + k + 1];
                let det = a * c - b * b;
                pivots.push(Pivot::Two(a, b, c));
                l[(k + 1) * n + k + 1] = T::one();
                for i in (k + 2)..n {
                    let x = w[i * n + k];
                    let y = w[i * n + k + 1];
                    // [x y] D^{-1}
                    l[i * n + k] = (x * c - y * b) / det;
                    l[i * n + k + 1] = (y * a - x * b) / det;
                }
                let x0: Vec<T> = ((k + 2)..n).map(|j| w[j * n + k]).collect();
                let x1: Vec<T> = ((k + 2)..n).map(|j| w[j * n + k + 1]).collect();
                for i in (k + 2)..n {
                    let (li0, li1) = (l[i * n + k], l[i * n + k + 1]);
                    let row = &mut w[i * n + k + 2..(i + 1) * n];
                    for ((x, &a0), &a1) in row.iter_mut().zip(&x0).zip(&x1) {
                        *x = *x - (li0 * a0 + li1 * a1);
                    }
                }
                k += 2;
            }
        }
        Self { n, l, pivots, perm }
    }

    pub fn inertia(&self) -> Inertia {
        let mut out = Inertia::default();
        for p in &self.pivots {
            match *p {
                Pivot::One(d) => {
                    if d < T::zero() {
                        out.negative += 1;
                    } else if d > T::zero() {
                        out.positive += 1;
                    } else {
                        out.zero += 1;
                    }
                }
                Pivot::Two(a, b, c) => {
                    let det = a * c - b * b;
                    if det < T::zero() {
                        out.negative += 1;
                        out.positive += 1;
                    } else if det > T::zero() {
                        if a + c > T::zero() {
                            out.positive += 2;
                        } else {
                            out.negative += 2;
                        }
                    } else {
                        out.zero += 1;
                        if a + c > T::zero() {
                            out.positive += 1;
                        } else {
                            out.negative += 1;
                        }
                    }
                }
            }
        }
        out
    }

    /// `(sign, ln|det A|)`; sign is zero for a singular matrix.
    pub fn log_det(&self) -> (T, T) {
        let mut sign = T::one();
        let mut log = T::zero();
        for p in &self.pivots {
            let d = match *p {
                Pivot::One(d) => d,
                Pivot::Two(a, b, c) => a * c - b * b,
            };
            if d == T::zero() {
                return (T::zero(), T::neg_infinity());
            }
            if d < T::zero() {
                sign = -sign;
            }
            log = log + d.abs().ln();
        }
        (sign, log)
    }

    /// Solve `A x = b`. Zero pivots are replaced by a tiny value so that the
    /// routine doubles as an inverse-iteration step on singular matrices.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let tiny = T::min_positive_value().sqrt();
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s = s - self.l[i * n + j] * y[j];
            }
            y[i] = s;
        }
        let mut k = 0;
        for p in &self.pivots {
            match *p {
                Pivot::One(d) => {
                    let d = if d == T::zero() { tiny } else { d };
                    y[k] = y[k] / d;
                    k += 1;
                }
                Pivot::Two(a, b, c) => {
                    let mut det = a * c - b * b;
                    if det == T::zero() {
                        det = tiny;
                    }
                    let (u, v) = (y[k], y[k + 1]);
                    y[k] = (c * u - b * v) / det;
                    y[k + 1] = (a * v - b * u) / det;
                    k += 2;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s = s - self.l[j * n + i] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}

/// Brent's method on a bracket with `f(lo)` and `f(hi)` of opposite sign.
///
/// Returns `None` when the bracket is not sign-changing.
pub fn brent<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, rel_tol: T, max_iter: usize) -> Option<(T, usize)> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Some((a, 0));
    }
    if fb == T::zero() {
        return Some((b, 0));
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return None;
    }
    let two = T::lit(2.0);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 0..max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + rel_tol * b.abs() / two;
        let m = (c - b) / two;
        if m.abs() <= tol || fb == T::zero() {
            return Some((b, iter));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < T::lit(3.0) * m * q - (tol * q).abs() && p < (e * q / two).abs() {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        fb = f(b);
    }
    Some((b, max_iter))
}

/// Unnormalized type-I discrete sine transform
/// `X_k = sum_{j=1}^{N-1} x_j sin(pi j k / N)`, `k = 1..N-1`, via a length-2N FFT.
pub struct DstI<T: Real> {
    intervals: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> DstI<T> {
    /// Transform of length `intervals - 1`.
    pub fn new(intervals: usize, planner: &mut FftPlanner<T>) -> Self {
        Self {
            intervals,
            fft: planner.plan_fft_forward(2 * intervals),
        }
    }

    pub fn len(&self) -> usize {
        self.intervals - 1
    }

    pub fn is_empty(&self) -> bool {
        self.intervals < 2
    }

    /// In-place transform; `scratch` must hold `2 * intervals` values.
    pub fn apply(&self, x: &mut [T], scratch: &mut Vec<Complex<T>>) {
        let n = self.intervals;
        debug_assert_eq!(x.len(), n - 1);
        scratch.clear();
        scratch.resize(2 * n, Complex::new(T::zero(), T::zero()));
        for j in 1..n {
            scratch[j] = Complex::new(x[j - 1], T::zero());
            scratch[2 * n - j] = Complex::new(-x[j - 1], T::zero());
        }
        self.fft.process(scratch);
        let half = T::lit(-0.5);
        for k in 1..n {
            x[k - 1] = scratch[k].im * half;
        }
    }
}
