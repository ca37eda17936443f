//! Detection of frontier shifts confined to part of the input space: the
//! left-expanding search where each interval's statistic is the maximum over
//! the cells of a [`MultiScaleGrid`].

use crate::error::{FcpError, Result};
use crate::global::{assemble, left_expanding, Regions};
use crate::grid::{build_grid, GridCell, MultiScaleGrid};
use crate::model::{trim_quantile, DetectionResult, DetectorConfig, Series};
use crate::scalar::Scalar;
use crate::scores::ScoreSeries;
use crate::stat::{scan_with, MemberScan, SegmentStat};

/// A cell's members are the active observations whose (rescaled) input lies
/// in the closed cube.
struct GridRegions<'a, T> {
    grid: &'a MultiScaleGrid<T>,
    rescaled: Vec<Vec<T>>,
}

impl<T: Scalar> Regions<T> for GridRegions<'_, T> {
    fn scanners(
        &self,
        _series: &Series<T>,
        scores: &ScoreSeries<T>,
        upto: usize,
    ) -> Vec<MemberScan<T>> {
        let upto = upto.min(scores.len());
        self.grid
            .cells
            .iter()
            .map(|cell| {
                let members = (1..=upto)
                    .filter(|&t| scores.active[t - 1] && cell.contains(&self.rescaled[t - 1]))
                    .map(|t| (t, scores.r_hat[t - 1]))
                    .collect();
                MemberScan::new(members)
            })
            .collect()
    }
}

/// Dense scan of `L^{cell}_{t1, tau, t2}`. `cell` must be in the same units
/// as the series inputs.
pub fn quasi_lr_scan_cell<T: Scalar>(
    series: &Series<T>,
    scores: &ScoreSeries<T>,
    cell: &GridCell<T>,
    t1: usize,
    t2: usize,
) -> Result<Vec<SegmentStat<T>>> {
    let n = scores.len().min(series.n());
    if t1 < 1 || t1 > t2 || t2 > n {
        return Err(FcpError::IndexOutOfRange { t1, t2, n });
    }
    if cell.lo.len() != series.d() {
        return Err(FcpError::DimensionMismatch {
            expected: series.d(),
            found: cell.lo.len(),
        });
    }
    Ok(scan_with(t1, t2, |t| {
        (scores.active[t - 1] && cell.contains(&series.at(t).x)).then(|| scores.r_hat[t - 1])
    }))
}

/// Multi-scale local change detection. `a_n` caps the grid depth at
/// `ceil(log2(A_n^(1/d)))` on the rescaled unit box.
pub fn detect_multi_local<T: Scalar>(
    series: &Series<T>,
    config: &DetectorConfig<T>,
    a_n: f64,
) -> Result<DetectionResult<T>> {
    config.validate()?;
    if !(a_n >= 1.0) || !a_n.is_finite() {
        return Err(FcpError::InvalidParameter(format!(
            "A_n must be >= 1, got {a_n}"
        )));
    }
    let x0 = trim_quantile(series, config.alpha_trim)?;
    let grid = build_grid(series, &x0, a_n);
    detect_on_grid(series, config, &grid)
}

/// Same as [`detect_multi_local`] on a prebuilt grid (whose trimming box is
/// recomputed from `config` for the scores).
pub fn detect_on_grid<T: Scalar>(
    series: &Series<T>,
    config: &DetectorConfig<T>,
    grid: &MultiScaleGrid<T>,
) -> Result<DetectionResult<T>> {
    config.validate()?;
    let x0 = trim_quantile(series, config.alpha_trim)?;
    let regions = GridRegions {
        grid,
        rescaled: series.obs().iter().map(|o| grid.rescale(&o.x)).collect(),
    };
    let refitted = left_expanding(series, config, &x0, &regions)?;
    let (mut out, cell_idx) = assemble(series, config, &x0, &refitted);
    out.cells = Some(
        cell_idx
            .iter()
            .map(|&i| grid.cells[i].to_original(&grid.x_bar))
            .collect(),
    );
    Ok(out)
}
