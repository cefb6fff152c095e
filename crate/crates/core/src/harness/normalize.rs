use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeMode {
    /// Per-column midrange centering and one global scale so that every
    /// entry lands in `[-1, 1]`.
    AffineLinf,
    /// Per-column zero mean and unit variance.
    ZScore,
}

/// `normalized = (x - center) / scale`, column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizeTransform {
    pub mode: NormalizeMode,
    pub center: Array1<f64>,
    pub scale: Array1<f64>,
}

impl NormalizeTransform {
    pub fn apply(&self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        crate::error::check_dim("normalize width", self.center.len(), data.ncols())?;
        Ok((&data - &self.center) / &self.scale)
    }

    pub fn inverse(&self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        crate::error::check_dim("normalize width", self.center.len(), data.ncols())?;
        Ok(&data * &self.scale + &self.center)
    }
}

pub fn normalize(data: ArrayView2<'_, f64>, mode: NormalizeMode) -> Result<(Array2<f64>, NormalizeTransform)> {
    if data.nrows() == 0 || data.ncols() == 0 {
        return Err(Error::invalid("cannot normalize an empty matrix"));
    }
    let cols = data.ncols();
    let (center, scale) = match mode {
        NormalizeMode::AffineLinf => {
            let center = Array1::from_iter(data.columns().into_iter().map(|c| {
                let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                0.5 * (lo + hi)
            }));
            let spread = (&data - &center).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let s = if spread > 0.0 {
                spread
            } else {
                log::warn!("data is constant, affine normalization keeps scale 1");
                1.0
            };
            (center, Array1::from_elem(cols, s))
        }
        NormalizeMode::ZScore => {
            let mean = data.mean_axis(Axis(0)).unwrap();
            let std = data.std_axis(Axis(0), 0.0);
            let scale = Array1::from_iter(std.iter().enumerate().map(|(j, &s)| {
                if s > 0.0 {
                    s
                } else {
                    log::warn!("column {j} has zero variance, passing it through centered");
                    1.0
                }
            }));
            (mean, scale)
        }
    };
    let t = NormalizeTransform { mode, center, scale };
    Ok((t.apply(data)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample() -> Array2<f64> {
        Array2::from_shape_fn((40, 3), |(i, j)| ((i * 13 + j * 7) % 17) as f64 * (j as f64 + 0.5) - 3.0)
    }

    #[test]
    fn affine_bounds_and_idempotence() {
        let (once, t) = normalize(sample().view(), NormalizeMode::AffineLinf).unwrap();
        assert!(once.iter().all(|v| v.abs() <= 1.0 + 1e-15));
        assert!(once.iter().any(|v| (v.abs() - 1.0).abs() < 1e-15));
        let (twice, t2) = normalize(once.view(), NormalizeMode::AffineLinf).unwrap();
        assert!((&twice - &once).iter().all(|v| v.abs() < 1e-15));
        assert!(t2.scale.iter().all(|s| (s - 1.0).abs() < 1e-15));
        assert_eq!(t.mode, NormalizeMode::AffineLinf);

        let inside = array![[0.5, -0.25], [-0.5, 0.25]];
        let (out, rec) = normalize(inside.view(), NormalizeMode::AffineLinf).unwrap();
        assert_eq!(rec.scale[0], 0.5);
        assert_eq!(rec.inverse(out.view()).unwrap(), inside);
    }

    #[test]
    fn zscore_moments() {
        let (z, _) = normalize(sample().view(), NormalizeMode::ZScore).unwrap();
        for c in z.columns() {
            let mean = c.mean().unwrap();
            let var = c.mapv(|v| (v - mean).powi(2)).mean().unwrap();
            assert!(mean.abs() < 1e-10);
            assert!((var - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_variance_column_passes_through() {
        let x = array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        let (z, t) = normalize(x.view(), NormalizeMode::ZScore).unwrap();
        assert_eq!(t.scale[1], 1.0);
        assert!(z.column(1).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn round_trips() {
        let x = sample();
        for mode in [NormalizeMode::AffineLinf, NormalizeMode::ZScore] {
            let (y, t) = normalize(x.view(), mode).unwrap();
            let back = t.inverse(y.view()).unwrap();
            assert!((&back - &x).iter().all(|v| v.abs() < 1e-12));
        }
        assert!(normalize(Array2::<f64>::zeros((0, 2)).view(), NormalizeMode::ZScore).is_err());
    }
}
