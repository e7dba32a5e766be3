//! Eigenvalues of a general 4×4 complex matrix.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift
//! complex QR sweeps (Wilkinson shift, Givens rotations) with deflation of
//! negligible subdiagonal entries. Only eigenvalues are accumulated; no Schur
//! vectors are formed.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::{Mat4, DIM};
use crate::scalar::{Cx, Real};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 40;

/// Reduces `m` to upper Hessenberg form by a unitary similarity.
pub fn hessenberg<T: Real>(m: &Mat4<T>) -> Mat4<T> {
    let mut h = *m;
    for k in 0..DIM - 2 {
        // Householder vector annihilating h[k+2.., k].
        let mut x = [Cx::<T>::zero(); DIM];
        let mut norm_sq = T::zero();
        for i in (k + 1)..DIM {
            x[i] = h[(i, k)];
            norm_sq = norm_sq + x[i].norm_sqr();
        }
        let tail: T = ((k + 2)..DIM).fold(T::zero(), |acc, i| acc + x[i].norm_sqr());
        if tail == T::zero() {
            continue;
        }
        let alpha = norm_sq.sqrt();
        let lead = x[k + 1];
        let phase = if lead.norm() == T::zero() {
            Cx::new(T::one(), T::zero())
        } else {
            lead / lead.norm()
        };
        // v = x + phase·‖x‖·e₁ avoids cancellation.
        x[k + 1] = lead + phase * alpha;
        let v_norm_sq = ((k + 1)..DIM).fold(T::zero(), |acc, i| acc + x[i].norm_sqr());
        let two = T::lit(2.0);

        // H ← (I − 2vv†/v†v) H
        for j in 0..DIM {
            let dot = ((k + 1)..DIM).fold(Cx::zero(), |acc, i| acc + x[i].conj() * h[(i, j)]);
            let f = dot * two / v_norm_sq;
            for i in (k + 1)..DIM {
                h[(i, j)] = h[(i, j)] - x[i] * f;
            }
        }
        // H ← H (I − 2vv†/v†v)
        for i in 0..DIM {
            let dot = ((k + 1)..DIM).fold(Cx::zero(), |acc, j| acc + h[(i, j)] * x[j]);
            let f = dot * two / v_norm_sq;
            for j in (k + 1)..DIM {
                h[(i, j)] = h[(i, j)] - f * x[j].conj();
            }
        }
        for i in (k + 2)..DIM {
            h[(i, k)] = Cx::zero();
        }
    }
    h
}

/// Eigenvalues of a 2×2 block `[[a, b], [c, d]]`, the one closest to `d` first.
fn eig2<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> (Cx<T>, Cx<T>) {
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let diff = (a - d) * half;
    let disc = (diff * diff + b * c).sqrt();
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        (l1, l2)
    } else {
        (l2, l1)
    }
}

/// `(c, s)` such that `[[c, s], [−s̄, c]]·[a, b]ᵀ = [r, 0]ᵀ`.
fn givens<T: Real>(a: Cx<T>, b: Cx<T>) -> (T, Cx<T>) {
    let an = a.norm();
    let bn = b.norm();
    if bn == T::zero() {
        return (T::one(), Cx::zero());
    }
    if an == T::zero() {
        return (T::zero(), b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// All four eigenvalues of `m`, in the order they deflate.
pub fn eigenvalues<T: Real>(m: &Mat4<T>) -> Result<[Cx<T>; DIM]> {
    let mut h = hessenberg(m);
    let mut out = [Cx::<T>::zero(); DIM];
    let eps = T::epsilon();
    let scale = m.max_abs();
    let mut hi = DIM - 1;
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;

    loop {
        if hi == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        // Find the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let reference = if diag == T::zero() { scale } else { diag };
            if sub <= eps * reference {
                h[(lo, lo - 1)] = Cx::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            out[hi] = l1;
            out[lo] = l2;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            since_deflation = 0;
            continue;
        }

        sweeps += 1;
        since_deflation += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE * DIM {
            return Err(Error::EigenNoConvergence { iterations: sweeps });
        }

        let mut shift = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]).0;
        if since_deflation % 10 == 0 {
            // Exceptional shift to break cycles.
            shift = h[(hi, hi)] + Cx::new(h[(hi, hi - 1)].norm() * T::lit(0.75), T::zero());
        }

        for i in lo..=hi {
            h[(i, i)] = h[(i, i)] - shift;
        }
        let mut rotations = [(T::one(), Cx::<T>::zero()); DIM];
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotations[k] = (c, s);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Cx::zero();
        }
        for k in lo..hi {
            let (c, s) = rotations[k];
            let last = (k + 2).min(hi);
            for i in lo..=last {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + s.conj() * y;
                h[(i, k + 1)] = -s * x + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] = h[(i, i)] + shift;
        }
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &Mat4<T>) -> Result<[T; DIM]> {
    let ev = eigenvalues(&m.hermitian_from_upper())?;
    let mut re = ev.map(|z| z.re);
    re.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(re)
}
