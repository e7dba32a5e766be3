//! Wootters concurrence.
//!
//! `C = max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄)` with `λᵢ` the eigenvalues of `ρρ̃` in
//! decreasing order and `ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`. The product `ρρ̃`
//! is not Hermitian; its spectrum is taken directly by Hessenberg–QR.

use num_traits::Zero;

use crate::eigen::{eigenvalues, hermitian_eigenvalues};
use crate::error::{Error, Result};
use crate::matrix::{Mat4, DIM};
use crate::qcore::{DensityMatrix, PureState, CLAMP_TOL};
use crate::scalar::{Cx, Real};

/// Eigenvalues within this many ulps of the matrix scale are roundoff and
/// are taken as zero; their square roots would otherwise leak `O(√ε)` into C.
const NOISE_FLOOR_ULPS: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcurrenceResult<T: Real> {
    pub value: T,
    /// `√λᵢ`, decreasing.
    pub lambdas: [T; DIM],
    /// Set when a slightly negative eigenvalue was clamped to zero.
    pub clamped: bool,
}

/// `σ_y ⊗ σ_y` in the bare basis: anti-diagonal `(−1, 1, 1, −1)`.
pub fn sigma_yy<T: Real>() -> Mat4<T> {
    let mut m = Mat4::zeros();
    m[(0, 3)].re = -T::one();
    m[(1, 2)].re = T::one();
    m[(2, 1)].re = T::one();
    m[(3, 0)].re = -T::one();
    m
}

/// `ρ̃ = Σ ρ* Σ` with `Σ = σ_y ⊗ σ_y`.
pub fn spin_flip<T: Real>(rho: &DensityMatrix<T>) -> Mat4<T> {
    // Σ only permutes indices i → 3 − i with sign s_i s_j.
    let sign = |i: usize| if i == 0 || i == 3 { -T::one() } else { T::one() };
    let m = rho.matrix();
    Mat4::from_fn(|i, j| m[(DIM - 1 - i, DIM - 1 - j)].conj() * (sign(i) * sign(j)))
}

/// Concurrence with the `√λᵢ` it was built from.
///
/// `ρρ̃` is far from normal near separable states, where a direct
/// eigen-solve loses half the working digits. Its spectrum is instead taken
/// from the similar Hermitian matrix `L†ρ̃L`, with `ρ = LL†` by pivoted
/// Cholesky; the QR path is the same. Non-positive input shows up as a
/// negative pivot or an indefinite remainder.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<ConcurrenceResult<T>> {
    let tol = T::tol(CLAMP_TOL);
    let l = pivoted_cholesky(rho.matrix(), tol)?;
    let h = (l.adjoint() * spin_flip(rho) * l).hermitian_from_upper();
    let floor = T::lit(NOISE_FLOOR_ULPS) * T::epsilon() * h.max_abs();
    let mut clamped = false;
    let mut lambdas = [T::zero(); DIM];
    for (slot, ev) in lambdas.iter_mut().zip(hermitian_eigenvalues(&h)?) {
        if ev < -tol {
            return Err(Error::UnphysicalSpectrum { re: ev.as_f64(), im: 0.0 });
        }
        if ev < -floor {
            clamped = true;
        }
        *slot = if ev <= floor { T::zero() } else { ev.sqrt() };
    }
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let value = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(T::zero()).min(T::one());
    Ok(ConcurrenceResult { value, lambdas, clamped })
}

/// Eigenvalues of `ρρ̃` by QR on the product itself.
///
/// Imaginary parts up to `1e-9` and negatives down to `−1e-9` are
/// rounding; anything beyond is an error.
pub fn rho_rho_tilde_spectrum<T: Real>(rho: &DensityMatrix<T>) -> Result<[T; DIM]> {
    let product = *rho.matrix() * spin_flip(rho);
    let tol = T::tol(CLAMP_TOL);
    let mut out = [T::zero(); DIM];
    for (slot, z) in out.iter_mut().zip(eigenvalues(&product)?) {
        if z.im.abs() > tol || z.re < -tol {
            return Err(Error::UnphysicalSpectrum { re: z.re.as_f64(), im: z.im.as_f64() });
        }
        *slot = z.re.max(T::zero());
    }
    out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// `L` with `ρ = L L†`, columns beyond the numerical rank zero.
fn pivoted_cholesky<T: Real>(rho: &Mat4<T>, tol: T) -> Result<Mat4<T>> {
    let mut s = rho.hermitian_from_upper();
    let mut l = Mat4::zeros();
    let mut done = [false; DIM];
    let stop = T::lit(NOISE_FLOOR_ULPS) * T::epsilon() * rho.max_abs();
    for col in 0..DIM {
        let (p, d) = (0..DIM)
            .filter(|&i| !done[i])
            .map(|i| (i, s[(i, i)].re))
            .fold((DIM, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if d <= stop {
            let residual = (0..DIM)
                .filter(|&i| !done[i])
                .flat_map(|i| (0..DIM).filter(|&j| !done[j]).map(move |j| (i, j)))
                .fold(T::zero(), |m, (i, j)| m.max(s[(i, j)].norm()));
            if d < -tol || residual > tol {
                return Err(Error::NotPositive { min_eigenvalue: d.min(-residual).as_f64() });
            }
            break;
        }
        let root = d.sqrt();
        for i in 0..DIM {
            l[(i, col)] = if done[i] { Cx::zero() } else { s[(i, p)] / root };
        }
        for i in 0..DIM {
            for j in 0..DIM {
                s[(i, j)] = s[(i, j)] - l[(i, col)] * l[(j, col)].conj();
            }
        }
        done[p] = true;
    }
    Ok(l)
}

/// `C = 2|a₁a₄ − a₂a₃|` for a pure state.
pub fn pure_concurrence<T: Real>(state: &PureState<T>) -> T {
    let a = state.amplitudes();
    (a[0] * a[3] - a[1] * a[2]).norm() * T::lit(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{pure_density, NamedState};
    use crate::scalar::cx;

    fn dm(n: NamedState) -> DensityMatrix<f64> {
        pure_density(&PureState::named(n)).unwrap()
    }

    #[test]
    fn spin_flip_examples() {
        assert_eq!(spin_flip(&dm(NamedState::G1G2)), *dm(NamedState::E1E2).matrix());
        assert!(spin_flip(&dm(NamedState::S)).max_abs_diff(dm(NamedState::S).matrix()) < 1e-15);
        let mixed = DensityMatrix::<f64>::maximally_mixed();
        assert_eq!(spin_flip(&mixed), *mixed.matrix());
    }

    #[test]
    fn spin_flip_matches_conjugation_by_sigma_yy() {
        let rho = dm(NamedState::F);
        let s = sigma_yy::<f64>();
        let direct = s * rho.matrix().conj() * s;
        assert!(spin_flip(&rho).max_abs_diff(&direct) < 1e-15);
    }

    #[test]
    fn product_and_bell_states() {
        assert_eq!(concurrence(&dm(NamedState::G1G2)).unwrap().value, 0.0);
        for n in [NamedState::S, NamedState::A, NamedState::P, NamedState::Q, NamedState::F, NamedState::K] {
            let c = concurrence(&dm(n)).unwrap();
            assert!((c.value - 1.0).abs() < 1e-12, "{n}: {c:?}");
        }
        for n in [NamedState::L1L2, NamedState::R1R2, NamedState::L1R2, NamedState::R1L2] {
            assert!(concurrence(&dm(n)).unwrap().value < 1e-7, "{n}");
        }
    }

    #[test]
    fn lambdas_are_sorted_and_consistent() {
        let s = dm(NamedState::S).matrix().scale(0.7);
        let rho = DensityMatrix::new(s + Mat4::identity().scale(0.3 / 4.0)).unwrap();
        let c = concurrence(&rho).unwrap();
        assert!(c.lambdas.windows(2).all(|w| w[0] >= w[1]));
        let l = c.lambdas;
        assert!((c.value - (l[0] - l[1] - l[2] - l[3]).max(0.0)).abs() < 1e-15);
        assert!((c.value - 0.55).abs() < 1e-12);
    }

    #[test]
    fn pure_formula_on_exchange_family() {
        for k in 0..20 {
            let th = k as f64 * 0.157;
            let st = PureState::new([cx(0.0, 0.0), cx(th.cos(), 0.0), cx(0.0, -th.sin()), cx(0.0, 0.0)]).unwrap();
            let want = 2.0 * th.cos().abs() * th.sin().abs();
            assert!((pure_concurrence::<f64>(&st) - want).abs() < 1e-14);
            let got = concurrence(&pure_density(&st).unwrap()).unwrap().value;
            assert!((got - want).abs() < 1e-7, "{k}: {got} {want}");
        }
    }

    #[test]
    fn f32_bell_state() {
        let rho = pure_density(&PureState::<f32>::named(NamedState::S)).unwrap();
        assert!((concurrence(&rho).unwrap().value - 1.0).abs() < 1e-5);
    }
}
