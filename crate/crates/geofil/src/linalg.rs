//! Dense helpers for the tiny (n <= ~8) symmetric matrices this crate works
//! with. Row-major `&[f64]` throughout; nothing here is meant to scale.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Determinant by LU with partial pivoting.
pub fn det(n: usize, a: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut sign = 1.0;
    let mut d = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            sign = -sign;
        }
        let p = m[col * n + col];
        d *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
        }
    }
    sign * d
}

/// Inverse by Gauss-Jordan with partial pivoting. `None` when a pivot
/// underflows (numerically singular).
pub fn inverse(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        let p = m[piv * n + col];
        if p.abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
                inv.swap(col * n + k, piv * n + k);
            }
        }
        let inv_p = 1.0 / p;
        for k in 0..n {
            m[col * n + k] *= inv_p;
            inv[col * n + k] *= inv_p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f != 0.0 {
                for k in 0..n {
                    m[r * n + k] -= f * m[col * n + k];
                    inv[r * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    Some(inv)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    // Symmetrize defensively; callers should already pass symmetric data.
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(n, &m)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

pub fn frobenius(n: usize, a: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn det_2x2() {
        // [[0,-1/2],[-1/2,0]] has determinant -1/4.
        let a = [0.0, -0.5, -0.5, 0.0];
        assert_abs_diff_eq!(det(2, &a), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn det_permutation_sign() {
        let a = [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        assert_abs_diff_eq!(det(3, &a), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn inverse_recovers_identity() {
        let a = [2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.5];
        let inv = inverse(3, &a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a[i * 3 + k] * inv[k * 3 + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(s, want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn inverse_rejects_singular() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(inverse(2, &a).is_none());
    }

    #[test]
    fn jacobi_eigenvalues_of_antidiagonal_block() {
        // [[0,-1/2],[-1/2,0]] has eigenvalues +-1/2.
        let mut ev = sym_eigenvalues(2, &[0.0, -0.5, -0.5, 0.0]);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(ev[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_matches_trace_and_det() {
        let a = [4.0, 1.0, 0.2, 1.0, 3.0, -0.5, 0.2, -0.5, 2.0];
        let ev = sym_eigenvalues(3, &a);
        let trace: f64 = ev.iter().sum();
        let prod: f64 = ev.iter().product();
        assert_abs_diff_eq!(trace, 9.0, epsilon = 1e-10);
        assert_abs_diff_eq!(prod, det(3, &a), epsilon = 1e-10);
    }
}
