//! Fixed-size 4×4 complex matrices for the two-molecule Hilbert space.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_traits::Zero;

use crate::scalar::{Cx, Real};

pub const DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4<T: Real>(pub [[Cx<T>; DIM]; DIM]);

impl<T: Real> Mat4<T> {
    pub fn zeros() -> Self {
        Self([[Cx::zero(); DIM]; DIM])
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { Cx::new(T::one(), T::zero()) } else { Cx::zero() })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(d: [Cx<T>; DIM]) -> Self {
        Self::from_fn(|i, j| if i == j { d[i] } else { Cx::zero() })
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[Cx<T>; DIM], v: &[Cx<T>; DIM]) -> Self {
        Self::from_fn(|i, j| u[i] * v[j].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].conj())
    }

    pub fn trace(&self) -> Cx<T> {
        (0..DIM).fold(Cx::zero(), |acc, i| acc + self.0[i][i])
    }

    pub fn scale(&self, k: T) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * k)
    }

    pub fn scale_cx(&self, k: Cx<T>) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * k)
    }

    /// `self · other − other · self`
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &[Cx<T>; DIM]) -> [Cx<T>; DIM] {
        let mut out = [Cx::zero(); DIM];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..DIM).fold(Cx::zero(), |acc, k| acc + self.0[i][k] * v[k]);
        }
        out
    }

    /// `⟨v|self|v⟩`
    pub fn expectation(&self, v: &[Cx<T>; DIM]) -> Cx<T> {
        let mv = self.apply(v);
        (0..DIM).fold(Cx::zero(), |acc, i| acc + v[i].conj() * mv[i])
    }

    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flatten()
            .fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Largest `|m_ij − conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..DIM {
            for j in i..DIM {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Mirrors the upper triangle into the lower one and drops the imaginary
    /// part of the diagonal.
    pub fn hermitian_from_upper(&self) -> Self {
        let mut m = *self;
        for i in 0..DIM {
            m.0[i][i].im = T::zero();
            for j in (i + 1)..DIM {
                m.0[j][i] = m.0[i][j].conj();
            }
        }
        m
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cx<T>> {
        self.0.iter().flatten()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (*self - *other).max_abs()
    }

    pub fn cast<U: Real>(&self) -> Mat4<U> {
        Mat4::from_fn(|i, j| {
            let z = self.0[i][j];
            Cx::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))
        })
    }
}

impl<T: Real> Index<(usize, usize)> for Mat4<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.0[i][j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Mat4<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.0[i][j]
    }
}

impl<T: Real> Add for Mat4<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl<T: Real> AddAssign for Mat4<T> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..DIM {
            for j in 0..DIM {
                self.0[i][j] = self.0[i][j] + rhs.0[i][j];
            }
        }
    }
}

impl<T: Real> Sub for Mat4<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl<T: Real> Neg for Mat4<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.0[i][j])
    }
}

impl<T: Real> Mul for Mat4<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| (0..DIM).fold(Cx::zero(), |acc, k| acc + self.0[i][k] * rhs.0[k][j]))
    }
}
