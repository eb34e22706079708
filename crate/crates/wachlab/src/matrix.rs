use crate::error::{Result, WachError};
use crate::relative::{RelBase, RelPD};

/// Coefficient ring for [`Mat`].
pub trait Entry: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn is_zero(&self) -> bool;
    fn eq_to_prec(&self, other: &Self) -> bool;
}

impl Entry for RelBase {
    fn zero_like(&self) -> Self {
        RelBase::zero(self.rp())
    }
    fn one_like(&self) -> Self {
        RelBase::one(self.rp())
    }
    fn add(&self, other: &Self) -> Self {
        RelBase::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RelBase::sub(self, other)
    }
    fn neg(&self) -> Self {
        RelBase::neg(self)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        RelBase::mul(self, other)
    }
    fn is_zero(&self) -> bool {
        RelBase::is_zero(self)
    }
    fn eq_to_prec(&self, other: &Self) -> bool {
        RelBase::eq_to_prec(self, other)
    }
}

impl Entry for RelPD {
    fn zero_like(&self) -> Self {
        RelPD::zero(self.rp(), self.flavor())
    }
    fn one_like(&self) -> Self {
        RelPD::one(self.rp(), self.flavor())
    }
    fn add(&self, other: &Self) -> Self {
        RelPD::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RelPD::sub(self, other)
    }
    fn neg(&self) -> Self {
        RelPD::neg(self)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        RelPD::mul(self, other)
    }
    fn is_zero(&self) -> bool {
        RelPD::is_zero(self)
    }
    fn eq_to_prec(&self, other: &Self) -> bool {
        RelPD::eq_to_prec(self, other)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Entry> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn try_from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Result<T>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j)?);
            }
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn identity(like: &T, n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { like.one_like() } else { like.zero_like() })
    }

    pub fn scalar(x: T) -> Self {
        Mat { rows: 1, cols: 1, data: vec![x] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn map<U: Entry>(&self, f: impl Fn(&T) -> Result<U>) -> Result<Mat<U>> {
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(WachError::ParamMismatch(format!(
                "matrix shapes {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(WachError::ParamMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Self::try_from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0).zero_like();
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j))?);
            }
            Ok(acc)
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(WachError::ParamMismatch("vector length".into()));
        }
        (0..self.rows)
            .map(|i| {
                let mut acc = self.get(i, 0).zero_like();
                for (k, x) in v.iter().enumerate() {
                    acc = acc.add(&self.get(i, k).mul(x)?);
                }
                Ok(acc)
            })
            .collect()
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| a.eq_to_prec(b))
    }

    /// Positions where `self` and `other` differ.
    pub fn diff_positions(&self, other: &Self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.rows.min(other.rows) {
            for j in 0..self.cols.min(other.cols) {
                if !self.get(i, j).eq_to_prec(other.get(i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        let z = self.data[0].zero_like();
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        Self::from_fn(r, c, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j).clone()
            } else if i >= self.rows && j >= self.cols {
                other.get(i - self.rows, j - self.cols).clone()
            } else {
                z.clone()
            }
        })
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        Self::try_from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self.get(i / other.rows, j / other.cols)
                .mul(other.get(i % other.rows, j % other.cols))
        })
    }

    fn minor(&self, skip_r: usize, skip_c: usize) -> Self {
        let mut data = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != skip_r && j != skip_c {
                    data.push(self.get(i, j).clone());
                }
            }
        }
        Mat {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    /// Determinant by cofactor expansion; ranks here stay small.
    pub fn det(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(WachError::ParamMismatch("determinant of a non-square matrix".into()));
        }
        match self.rows {
            0 => Err(WachError::ParamMismatch("empty matrix".into())),
            1 => Ok(self.data[0].clone()),
            n => {
                let mut acc = self.data[0].zero_like();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let t = a.mul(&self.minor(0, j).det()?)?;
                    acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
                }
                Ok(acc)
            }
        }
    }

    pub fn adjugate(&self) -> Result<Self> {
        let n = self.rows;
        if n == 1 {
            return Ok(Self::scalar(self.data[0].one_like()));
        }
        Self::try_from_fn(n, n, |i, j| {
            let c = self.minor(j, i).det()?;
            Ok(if (i + j) % 2 == 0 { c } else { c.neg() })
        })
    }
}

impl<T: Entry + std::fmt::Display> Mat<T> {
    pub fn to_text_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::{Chi0Policy, RingParams};
    use crate::relative::RelParams;

    #[test]
    fn adjugate_inverts_up_to_determinant() {
        let ring = RingParams::new(3, 1, 6, 16, 16, &Chi0Policy::Default).unwrap();
        let rp = RelParams::new(&ring, 1, 8, 4).unwrap();
        let e = |v: i64| RelBase::int(&rp, v);
        let m = Mat::from_fn(3, 3, |i, j| e([[2, 1, 0], [4, 5, 7], [1, 0, 3]][i][j]));
        let det = m.det().unwrap();
        assert!(det.eq_to_prec(&e(2 * 15 - 1 * (12 - 7))));
        let prod = m.mul(&m.adjugate().unwrap()).unwrap();
        let want = Mat::from_fn(3, 3, |i, j| if i == j { det.clone() } else { e(0) });
        assert!(prod.eq_to_prec(&want));
        let k = m.kron(&Mat::identity(&e(0), 2)).unwrap();
        assert_eq!((k.rows(), k.cols()), (6, 6));
        assert!(k.get(3, 1).eq_to_prec(&e(4)));
        assert!(k.get(3, 0).is_zero());
    }
}
