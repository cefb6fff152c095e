use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{check_dim, Error, Result};

/// Uniform-weight point cloud; each row is one atom with mass `1 / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    samples: Array2<f64>,
}

impl EmpiricalMeasure {
    pub fn new(samples: Array2<f64>) -> Result<Self> {
        if samples.nrows() == 0 {
            return Err(Error::invalid("empirical measure needs at least one sample"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "in empirical measure samples".into(),
            });
        }
        Ok(EmpiricalMeasure { samples })
    }

    pub fn samples(&self) -> ArrayView2<'_, f64> {
        self.samples.view()
    }

    pub fn into_samples(self) -> Array2<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn mean(&self) -> Array1<f64> {
        self.samples.mean_axis(Axis(0)).expect("non-empty measure")
    }
}

/// A full-state measure and its image in delay space. Row `j` of both sides
/// comes from the same time index.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePair {
    pub full: EmpiricalMeasure,
    pub delayed: EmpiricalMeasure,
    pub cell_id: usize,
    /// Row indices into the arrays the pair was built from, in time order.
    pub rows: Vec<usize>,
}

/// Groups rows by label into one pair per non-empty cell, keeping row order.
pub fn build_measure_pairs(
    full_states: ArrayView2<'_, f64>,
    delay_states: ArrayView2<'_, f64>,
    labels: &[usize],
) -> Result<Vec<MeasurePair>> {
    check_dim("measure pairs: delay rows", full_states.nrows(), delay_states.nrows())?;
    check_dim("measure pairs: labels", full_states.nrows(), labels.len())?;
    let n_cells = labels.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
    for (row, &label) in labels.iter().enumerate() {
        members[label].push(row);
    }
    let mut pairs = Vec::new();
    for (cell_id, rows) in members.into_iter().enumerate() {
        if rows.is_empty() {
            log::warn!("cell {cell_id} is empty, dropping it");
            continue;
        }
        let full = EmpiricalMeasure::new(full_states.select(Axis(0), &rows))?;
        let delayed = EmpiricalMeasure::new(delay_states.select(Axis(0), &rows))?;
        pairs.push(MeasurePair {
            full,
            delayed,
            cell_id,
            rows,
        });
    }
    Ok(pairs)
}

/// `f # mu` for an empirical measure: `f` applied to every atom.
pub fn pushforward_empirical<F>(measure: &EmpiricalMeasure, map: F) -> Result<EmpiricalMeasure>
where
    F: Fn(ArrayView1<'_, f64>) -> Array1<f64>,
{
    let images: Vec<Array1<f64>> = measure.samples.rows().into_iter().map(&map).collect();
    let out_dim = images[0].len();
    let mut out = Array2::zeros((images.len(), out_dim));
    for (j, img) in images.iter().enumerate() {
        check_dim("pushforward output", out_dim, img.len())?;
        if img.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("in pushforward image of sample {j}"),
            });
        }
        out.row_mut(j).assign(img);
    }
    EmpiricalMeasure::new(out)
}
