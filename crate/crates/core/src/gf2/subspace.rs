use super::matrix::BitMatrix;
use super::vector::BitVector;
use crate::error::{shape, Error, Result};

/// Subspace of GF(2)^d held as a reduced row-echelon basis. Two subspaces are
/// equal exactly when their bases are bit-equal.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: BitMatrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: BitMatrix::zeros(0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self::from_matrix(&BitMatrix::identity(ambient))
    }

    /// Row space of `m`.
    pub fn from_matrix(m: &BitMatrix) -> Self {
        let e = m.rref();
        let basis = BitMatrix::from_fn(e.rank, m.cols(), |i, j| e.reduced.get(i, j));
        Subspace {
            ambient: m.cols(),
            basis,
            pivots: e.pivots,
        }
    }

    pub fn span(ambient: usize, vectors: &[BitVector]) -> Result<Self> {
        Ok(Self::from_matrix(&BitMatrix::from_rows(ambient, vectors)?))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn codim(&self) -> usize {
        self.ambient - self.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<BitVector> {
        self.basis.row_vectors()
    }

    /// Pivot reduction against the echelon basis.
    pub fn contains(&self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.ambient, "membership test with wrong length");
        let mut r = v.clone();
        for (i, &p) in self.pivots.iter().enumerate() {
            if r.get(p) {
                r.xor_assign(&self.basis.row(i));
            }
        }
        r.is_zero()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis_vectors().iter().all(|b| other.contains(b))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(Self::from_matrix(&self.basis.vstack(&other.basis)?))
    }

    /// Zassenhaus: eliminate `[[U U], [W 0]]`; rows whose left half vanished carry
    /// a basis of the intersection in their right half.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let d = self.ambient;
        let top = self.basis.hstack(&self.basis)?;
        let bottom = other.basis.hstack(&BitMatrix::zeros(other.dim(), d))?;
        let e = top.vstack(&bottom)?.rref();
        let left_rank = e.pivots.iter().take_while(|&&p| p < d).count();
        let rows: Vec<BitVector> = (left_rank..e.rank)
            .map(|i| BitVector::from_bits((d..2 * d).map(|j| e.reduced.get(i, j))))
            .collect();
        Subspace::span(d, &rows)
    }

    /// `{m v : v in self}` for invertible square `m`.
    pub fn image(&self, m: &BitMatrix) -> Result<Subspace> {
        if !m.is_square() || m.cols() != self.ambient {
            return Err(shape(format!(
                "cannot map a subspace of GF(2)^{} through a {}x{} matrix",
                self.ambient,
                m.rows(),
                m.cols()
            )));
        }
        let rank = m.rank();
        if rank < m.rows() {
            return Err(Error::Singular {
                size: m.rows(),
                rank,
            });
        }
        // rows of B m^t are the images m b of the basis rows b.
        Ok(Self::from_matrix(&self.basis.mul(&m.transpose())?))
    }

    /// All 2^dim elements, in the order of binary counting over basis coefficients.
    pub fn elements(&self) -> Vec<BitVector> {
        assert!(
            self.dim() <= 24,
            "refusing to enumerate a {}-dim subspace",
            self.dim()
        );
        let rows = self.basis_vectors();
        (0..1u64 << self.dim())
            .map(|c| {
                let mut v = BitVector::zeros(self.ambient);
                for (i, r) in rows.iter().enumerate() {
                    if (c >> i) & 1 == 1 {
                        v.xor_assign(r);
                    }
                }
                v
            })
            .collect()
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(shape(format!(
                "subspaces of GF(2)^{} and GF(2)^{}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(vs: &[&str]) -> Subspace {
        let vs: Vec<BitVector> = vs.iter().map(|s| s.parse().unwrap()).collect();
        Subspace::span(vs[0].len(), &vs).unwrap()
    }

    #[test]
    fn intersection_examples() {
        assert!(sp(&["10"]).intersect(&sp(&["01"])).unwrap().is_zero());
        let s = sp(&["110", "011"]);
        assert_eq!(s.intersect(&s).unwrap(), s);
        assert_eq!(
            sp(&["10", "01"]).intersect(&sp(&["11"])).unwrap(),
            sp(&["11"])
        );
        assert!(sp(&["10"]).intersect(&sp(&["100"])).is_err());
    }

    #[test]
    fn image_examples() {
        let s = sp(&["01"]);
        assert_eq!(s.image(&BitMatrix::identity(2)).unwrap(), s);
        let swap = BitMatrix::from_strs(&["01", "10"]).unwrap();
        assert_eq!(s.image(&swap).unwrap(), sp(&["10"]));
        assert_eq!(s.image(&swap).unwrap().image(&swap).unwrap(), s);
        let singular = BitMatrix::from_strs(&["11", "11"]).unwrap();
        assert!(matches!(s.image(&singular), Err(Error::Singular { .. })));
    }

    #[test]
    fn canonical_equality_ignores_generators() {
        assert_eq!(sp(&["110", "011"]), sp(&["101", "011", "110"]));
        assert_ne!(sp(&["110"]), sp(&["011"]));
    }

    #[test]
    fn elements_of_a_plane() {
        let e = sp(&["110", "011"]).elements();
        assert_eq!(e.len(), 4);
        assert!(e.contains(&"101".parse().unwrap()));
        assert!(e.contains(&"000".parse().unwrap()));
    }
}
