//! Second-order series in the weak-measurement outcome `δz`, with `δz²`
//! identified with `δt`.
//!
//! Arithmetic is in the ring `R[z]/(z³)`: products drop every term of order
//! `z³` (that is `δz·δt`) and beyond. A series `c0 + c1 z + c2 z²` evaluates
//! to `c0 + c1 δz + c2 δt`. Because the ring is commutative, trace identities
//! such as `tr(K†EKρ) = tr(E KρK†)` hold exactly at this order.

use std::ops::{Add, Mul};

use crate::error::Result;
use crate::qops::ComplexMatrix;
use crate::wigner::{operator_to_wigner, TableKind};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Series(pub [f64; 3]);

impl Series {
    pub fn constant(c: f64) -> Self {
        Series([c, 0.0, 0.0])
    }

    /// `c0 + c1 δz + c2 δt`.
    pub fn eval(&self, delta_z: f64, delta_t: f64) -> f64 {
        self.0[0] + self.0[1] * delta_z + self.0[2] * delta_t
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, rhs: Series) -> Series {
        Series([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, rhs: Series) -> Series {
        let (a, b) = (self.0, rhs.0);
        Series([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
        ])
    }
}

impl std::iter::Sum for Series {
    fn sum<I: Iterator<Item = Series>>(iter: I) -> Series {
        iter.fold(Series::default(), |a, b| a + b)
    }
}

/// Matrix-valued series `M0 + M1 z + M2 z²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix(pub [ComplexMatrix; 3]);

impl SeriesMatrix {
    pub fn constant(m: ComplexMatrix) -> Self {
        let z = ComplexMatrix::zeros(m.dim());
        SeriesMatrix([m, z.clone(), z])
    }

    pub fn adjoint(&self) -> Self {
        SeriesMatrix([
            self.0[0].adjoint(),
            self.0[1].adjoint(),
            self.0[2].adjoint(),
        ])
    }

    pub fn try_mul(&self, rhs: &SeriesMatrix) -> Result<SeriesMatrix> {
        let (a, b) = (&self.0, &rhs.0);
        let c0 = a[0].try_mul(&b[0])?;
        let c1 = a[0].try_mul(&b[1])?.try_add(&a[1].try_mul(&b[0])?)?;
        let c2 = a[0]
            .try_mul(&b[2])?
            .try_add(&a[1].try_mul(&b[1])?)?
            .try_add(&a[2].try_mul(&b[0])?)?;
        Ok(SeriesMatrix([c0, c1, c2]))
    }

    /// Phase-space series `scale * tr(A(λ) M(z))`, one per point.
    pub fn wigner(&self, scale: f64) -> Result<Vec<Series>> {
        let tables = self
            .0
            .iter()
            .map(|m| operator_to_wigner(m, scale, TableKind::Unnormalized))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..tables[0].values().len())
            .map(|i| {
                Series([
                    tables[0].values()[i],
                    tables[1].values()[i],
                    tables[2].values()[i],
                ])
            })
            .collect())
    }

    pub fn eval(&self, delta_z: f64, delta_t: f64) -> ComplexMatrix {
        self.0[0]
            .try_add(&self.0[1].scale_real(delta_z))
            .and_then(|m| m.try_add(&self.0[2].scale_real(delta_t)))
            .expect("coefficients share a dimension")
    }
}
