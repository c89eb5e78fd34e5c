//! Eigenvalues of 3x3 symmetric matrices.
//!
//! The trigonometric closed form handles the common case. When two roots come
//! close together the matrix is reduced to tridiagonal form and finished with
//! implicit QL iterations. Both paths are allocation-free.

use std::f64::consts::PI;

use crate::vec3::{cross, dot, normalize, Vec3};

/// Packed symmetric 3x3 matrix: `[xx, yy, zz, xy, xz, yz]`.
pub type Sym3 = [f64; 6];

pub const ZERO: Sym3 = [0.0; 6];

#[inline]
pub fn outer_add(t: &mut Sym3, n: Vec3, w: f64) {
    t[0] += w * n[0] * n[0];
    t[1] += w * n[1] * n[1];
    t[2] += w * n[2] * n[2];
    t[3] += w * n[0] * n[1];
    t[4] += w * n[0] * n[2];
    t[5] += w * n[1] * n[2];
}

#[inline]
pub fn mul_vec(t: &Sym3, v: Vec3) -> Vec3 {
    [
        t[0] * v[0] + t[3] * v[1] + t[4] * v[2],
        t[3] * v[0] + t[1] * v[1] + t[5] * v[2],
        t[4] * v[0] + t[5] * v[1] + t[2] * v[2],
    ]
}

/// Frobenius norm.
pub fn frobenius(t: &Sym3) -> f64 {
    (t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + 2.0 * (t[3] * t[3] + t[4] * t[4] + t[5] * t[5]))
        .sqrt()
}

/// Closeness of `|r|` to 1 below which the closed form is abandoned.
const NEAR_DOUBLE: f64 = 1e-10;

/// Eigenvalues sorted descending.
pub fn eigenvalues(t: &Sym3) -> [f64; 3] {
    let [a, b, c, d, e, f] = *t;
    let off = d * d + e * e + f * f;
    if off == 0.0 {
        return sort3([a, b, c]);
    }
    let q = (a + b + c) / 3.0;
    let (a0, b0, c0) = (a - q, b - q, c - q);
    let p2 = a0 * a0 + b0 * b0 + c0 * c0 + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    // det((T - qI) / p) / 2
    let r = (a0 * (b0 * c0 - f * f) - d * (d * c0 - f * e) + e * (d * f - b0 * e)) / (2.0 * p * p * p);
    if !(r.abs() < 1.0 - NEAR_DOUBLE) {
        return tridiagonal_ql(t);
    }
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    sort3([e1, e2, e3])
}

#[inline]
fn sort3(mut v: [f64; 3]) -> [f64; 3] {
    if v[0] < v[1] {
        v.swap(0, 1);
    }
    if v[1] < v[2] {
        v.swap(1, 2);
    }
    if v[0] < v[1] {
        v.swap(0, 1);
    }
    v
}

/// Givens reduction to tridiagonal form followed by implicit QL sweeps.
fn tridiagonal_ql(t: &Sym3) -> [f64; 3] {
    let [a, b, c, d, e, f] = *t;
    let mut diag = [a, b, c];
    let mut sub = [d, f, 0.0];
    let h = d.hypot(e);
    if e != 0.0 && h > 0.0 {
        // rotate rows/columns 1 and 2 so that the (0, 2) entry vanishes
        let (cs, sn) = (d / h, e / h);
        diag[1] = cs * cs * b + 2.0 * cs * sn * f + sn * sn * c;
        diag[2] = sn * sn * b - 2.0 * cs * sn * f + cs * cs * c;
        sub = [h, (cs * cs - sn * sn) * f + cs * sn * (c - b), 0.0];
    }

    let n = 3;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if sub[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l || iterations == 64 {
                break;
            }
            iterations += 1;
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * sub[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + sub[l] / (g + r.copysign(g));
            let (mut s, mut cc, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let ff = s * sub[i];
                let bb = cc * sub[i];
                r = ff.hypot(g);
                sub[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    sub[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = ff / r;
                cc = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * cc * bb;
                p = s * r;
                diag[i + 1] = g + p;
                g = cc * r - bb;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }
    sort3(diag)
}

/// A unit eigenvector for `lambda`, taken from the best-conditioned cross
/// product of two rows of `T - lambda I`. Falls back to an arbitrary unit
/// vector orthogonal to the dominant row when the eigenspace is not 1-D.
pub fn eigenvector(t: &Sym3, lambda: f64) -> Vec3 {
    let r0 = [t[0] - lambda, t[3], t[4]];
    let r1 = [t[3], t[1] - lambda, t[5]];
    let r2 = [t[4], t[5], t[2] - lambda];
    let candidates = [cross(r0, r1), cross(r1, r2), cross(r2, r0)];
    let best = candidates
        .iter()
        .copied()
        .max_by(|x, y| dot(*x, *x).total_cmp(&dot(*y, *y)))
        .unwrap_or([0.0; 3]);
    if let Some(u) = normalize(best) {
        if dot(best, best) > 1e-24 * frobenius(t).max(1.0).powi(4) {
            return u;
        }
    }
    let rows = [r0, r1, r2];
    let dominant = rows
        .iter()
        .copied()
        .max_by(|x, y| dot(*x, *x).total_cmp(&dot(*y, *y)))
        .unwrap_or([0.0; 3]);
    let helper = if dominant[0].abs() < 0.9 * crate::vec3::norm(dominant) {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    normalize(cross(dominant, helper)).unwrap_or([1.0, 0.0, 0.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn diagonal_and_rank_one() {
        assert_eq!(eigenvalues(&[1.0, 3.0, 2.0, 0.0, 0.0, 0.0]), [3.0, 2.0, 1.0]);
        let mut t = ZERO;
        let n = crate::vec3::normalize([1.0, 2.0, 2.0]).unwrap();
        outer_add(&mut t, n, 2.5);
        assert!(close(eigenvalues(&t), [2.5, 0.0, 0.0], 1e-14));
    }

    #[test]
    fn known_spectrum() {
        // [[2,1,0],[1,2,0],[0,0,5]] has eigenvalues 5, 3, 1
        let t = [2.0, 2.0, 5.0, 1.0, 0.0, 0.0];
        assert!(close(eigenvalues(&t), [5.0, 3.0, 1.0], 1e-13));
        // double root: [[2,1,1],[1,2,1],[1,1,2]] -> 4, 1, 1
        let t = [2.0, 2.0, 2.0, 1.0, 1.0, 1.0];
        assert!(close(eigenvalues(&t), [4.0, 1.0, 1.0], 1e-13));
        assert!(close(tridiagonal_ql(&t), [4.0, 1.0, 1.0], 1e-13));
    }

    #[test]
    fn ql_matches_closed_form() {
        let t = [4.0, 1.0, -2.0, 0.5, 0.25, -1.5];
        assert!(close(tridiagonal_ql(&t), eigenvalues(&t), 1e-12));
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let t = [4.0, 1.0, -2.0, 0.5, 0.25, -1.5];
        for lambda in eigenvalues(&t) {
            let u = eigenvector(&t, lambda);
            let tu = mul_vec(&t, u);
            let res = crate::vec3::norm(crate::vec3::sub(tu, crate::vec3::scale(u, lambda)));
            assert!(res < 1e-12, "residual {res}");
        }
    }
}
