//! Angular-momentum algebra on exact half-integers: Clebsch-Gordan
//! coefficients, ladder matrix elements and the `I·J` operator in the
//! uncoupled `|m_j, m_I>` basis.

mod cg;
mod halfint;

pub use cg::{clebsch_gordan, clebsch_gordan_exact, ExactCg};
pub use halfint::HalfInt;

use crate::error::Result;
use crate::matrix::Matrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Raise,
    Lower,
}

/// `<j, m±1 | J± | j, m>`; zero at the edge of the multiplet.
pub fn ladder_element<T: Real>(j: HalfInt, m: HalfInt, direction: Ladder) -> Result<T> {
    j.check_projection(m, "j")?;
    // doubled quantities: (j - m)(j + m + 1) = (tj - tm)(tj + tm + 2) / 4
    let (tj, tm) = (j.twice(), m.twice());
    let prod = match direction {
        Ladder::Raise => (tj - tm) * (tj + tm + 2),
        Ladder::Lower => (tj + tm) * (tj - tm + 2),
    };
    Ok(T::lit(f64::from(prod) / 4.0).sqrt())
}

/// An operator on the product space `|m_j, m_I>`, rows ordered by `m_j`
/// descending then `m_I` descending.
#[derive(Debug, Clone)]
pub struct ProductOperator<T> {
    pub labels: Vec<(HalfInt, HalfInt)>,
    pub entries: Matrix<T>,
}

pub fn product_basis(j: HalfInt, i: HalfInt) -> Vec<(HalfInt, HalfInt)> {
    j.projections()
        .flat_map(|mj| i.projections().map(move |mi| (mj, mi)))
        .collect()
}

/// Dimensionless `I·J = J_z I_z + (J+ I- + J- I+)/2`.
pub fn idotj_matrix<T: Real>(j: HalfInt, i: HalfInt) -> Result<ProductOperator<T>> {
    j.check_magnitude("J")?;
    i.check_magnitude("I")?;
    let labels = product_basis(j, i);
    let n = labels.len();
    let mut entries = Matrix::zeros(n, n);
    let half = T::lit(0.5);
    for (a, &(mj, mi)) in labels.iter().enumerate() {
        entries[(a, a)] = mj.to_real::<T>() * mi.to_real::<T>();
        // flip-flop to (mj + 1, mi - 1)
        let target = (mj + HalfInt::ONE, mi - HalfInt::ONE);
        if let Some(b) = labels.iter().position(|&l| l == target) {
            let v = half
                * ladder_element::<T>(j, mj, Ladder::Raise)?
                * ladder_element::<T>(i, mi, Ladder::Lower)?;
            entries[(a, b)] = v;
            entries[(b, a)] = v;
        }
    }
    Ok(ProductOperator { labels, entries })
}

/// Hyperfine interval energy `(F(F+1) - J(J+1) - I(I+1)) / 2` in units of `A`.
pub fn lande_interval<T: Real>(f: HalfInt, j: HalfInt, i: HalfInt) -> T {
    let x = |h: HalfInt| h.to_f64() * (h.to_f64() + 1.0);
    T::lit((x(f) - x(j) - x(i)) / 2.0)
}

/// Coupled state `|F, m_F>` expanded over [`product_basis`]`(j, i)`.
pub fn coupled_state<T: Real>(
    j: HalfInt,
    i: HalfInt,
    f: HalfInt,
    mf: HalfInt,
) -> Result<Vec<T>> {
    f.check_projection(mf, "F")?;
    product_basis(j, i)
        .into_iter()
        .map(|(mj, mi)| clebsch_gordan(j, mj, i, mi, f, mf))
        .collect()
}
