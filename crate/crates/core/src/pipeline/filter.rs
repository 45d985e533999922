//! Per-cell temporal outlier filtering.

use std::collections::VecDeque;
use std::sync::Arc;

use super::PipelineError;
use crate::registry::Registry;
use crate::tof::{CombinedGrid, Grid, ZoneReading};

/// Collapses one cell's recent history into a single reading.
pub trait WindowReducer: Send + Sync {
    fn name(&self) -> &'static str;
    /// `values` holds the valid samples of the window, oldest first, and is
    /// never empty.
    fn reduce(&self, values: &[f64]) -> f64;
}

/// Median of the window; even counts average the two middle samples.
pub struct Median;

impl WindowReducer for Median {
    fn name(&self) -> &'static str {
        "median"
    }

    fn reduce(&self, values: &[f64]) -> f64 {
        median(values)
    }
}

/// Passes the newest sample through unchanged.
pub struct Latest;

impl WindowReducer for Latest {
    fn name(&self) -> &'static str {
        "latest"
    }

    fn reduce(&self, values: &[f64]) -> f64 {
        *values.last().expect("non-empty window")
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

pub fn filter_registry() -> Registry<dyn WindowReducer> {
    let mut reg: Registry<dyn WindowReducer> = Registry::new("temporal filter");
    for r in [Arc::new(Median) as Arc<dyn WindowReducer>, Arc::new(Latest)] {
        reg.register(r.name(), r);
    }
    reg
}

/// Sliding windows of the last `W` readings for every grid cell.
#[derive(Clone)]
pub struct FilterState {
    window_len: usize,
    reducer: Arc<dyn WindowReducer>,
    windows: Option<Grid<VecDeque<ZoneReading>>>,
    frames_seen: usize,
}

impl std::fmt::Debug for FilterState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FilterState")
            .field("window_len", &self.window_len)
            .field("reducer", &self.reducer.name())
            .finish_non_exhaustive()
    }
}

impl FilterState {
    pub fn new(window_len: usize, reducer: Arc<dyn WindowReducer>) -> Result<Self, PipelineError> {
        if window_len == 0 {
            return Err(PipelineError::Config("window length must be >= 1".into()));
        }
        Ok(Self {
            window_len,
            reducer,
            windows: None,
            frames_seen: 0,
        })
    }

    pub fn median(window_len: usize) -> Result<Self, PipelineError> {
        Self::new(window_len, Arc::new(Median))
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Pushes `grid` into the windows and returns the filtered grid. The
    /// first grid fixes the dimensions.
    ///
    /// Until `W` frames have been seen every cell reports no target, so a
    /// spike cannot pass through a partly filled window.
    pub fn step(&mut self, grid: &CombinedGrid) -> Result<CombinedGrid, PipelineError> {
        let (rows, cols) = (grid.rows(), grid.cols());
        let windows = self
            .windows
            .get_or_insert_with(|| Grid::filled(rows, cols, VecDeque::new()));
        if windows.rows() != rows || windows.cols() != cols {
            return Err(PipelineError::DimensionMismatch {
                expected: (windows.rows(), windows.cols()),
                got: (rows, cols),
            });
        }
        self.frames_seen += 1;
        let warming_up = self.frames_seen < self.window_len;
        let mut out = Vec::with_capacity(rows * cols);
        let mut valid = Vec::with_capacity(self.window_len);
        for r in 0..rows {
            for c in 0..cols {
                let w = windows.get_mut(r, c);
                if w.len() == self.window_len {
                    w.pop_front();
                }
                w.push_back(*grid.cells.get(r, c));
                valid.clear();
                valid.extend(w.iter().filter(|z| z.valid).map(|z| z.mm));
                out.push(if warming_up {
                    ZoneReading::valid(grid.sentinel_mm)
                } else if valid.is_empty() {
                    ZoneReading::invalid(grid.sentinel_mm)
                } else {
                    ZoneReading::valid(self.reducer.reduce(&valid))
                });
            }
        }
        Ok(CombinedGrid {
            tick: grid.tick,
            cells: Grid::from_vec(rows, cols, out),
            row_elevation_deg: grid.row_elevation_deg.clone(),
            sentinel_mm: grid.sentinel_mm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cell(v: Option<f64>) -> CombinedGrid {
        CombinedGrid::from_mm(0, &[vec![v]], 4000.0)
    }

    fn run(state: &mut FilterState, stream: &[Option<f64>]) -> Vec<ZoneReading> {
        stream
            .iter()
            .map(|v| *state.step(&cell(*v)).unwrap().cells.get(0, 0))
            .collect()
    }

    #[test]
    fn constant_stream_is_fixed_point() {
        let mut f = FilterState::median(5).unwrap();
        let out = run(&mut f, &[Some(750.0); 9]);
        assert!(out[..4].iter().all(|z| z.valid && z.mm == 4000.0));
        assert!(out[4..].iter().all(|z| z.valid && z.mm == 750.0));
    }

    #[test]
    fn single_spike_is_rejected() {
        let mut f = FilterState::median(5).unwrap();
        let s = [
            1000.0, 1000.0, 1000.0, 1000.0, 1000.0, 100.0, 1000.0, 1000.0, 1000.0,
        ]
        .map(Some);
        let out = run(&mut f, &s);
        assert!(out[4..].iter().all(|z| z.mm == 1000.0));
    }

    #[test]
    fn warm_up_hides_early_spikes() {
        let mut f = FilterState::median(5).unwrap();
        let s = [100.0, 100.0, 1000.0, 1000.0, 1000.0, 1000.0].map(Some);
        let out = run(&mut f, &s);
        assert!(out.iter().all(|z| z.valid && z.mm >= 1000.0), "{out:?}");
    }

    #[test]
    fn step_change_latency() {
        // by hand: with W = 5 the median flips once three of five samples are new
        let w = 5;
        let mut f = FilterState::median(w).unwrap();
        let mut stream = vec![Some(2000.0); 10];
        stream.extend(vec![Some(800.0); 10]);
        let out = run(&mut f, &stream);
        let first = out.iter().position(|z| z.mm == 800.0).unwrap();
        assert_eq!(first, 10 + w / 2);
        assert!(first - 10 < w.div_ceil(2) + 1);
    }

    #[test]
    fn invalid_samples_are_excluded() {
        let mut f = FilterState::median(3).unwrap();
        let out = run(&mut f, &[None, None, None, Some(500.0), None, None, None]);
        assert!(!out[2].valid && out[2].mm == 4000.0);
        assert_eq!(out[3], ZoneReading::valid(500.0));
        assert_eq!(out[5], ZoneReading::valid(500.0));
        assert!(!out[6].valid);
    }

    #[test]
    fn dimension_mismatch() {
        let mut f = FilterState::median(3).unwrap();
        f.step(&cell(Some(1.0))).unwrap();
        let big = CombinedGrid::all_sentinel(1, 2, 2, 4000.0);
        assert!(matches!(
            f.step(&big),
            Err(PipelineError::DimensionMismatch { .. })
        ));
        assert!(FilterState::median(0).is_err());
    }

    #[test]
    fn registry_lists_reducers() {
        let reg = filter_registry();
        assert_eq!(reg.names(), ["latest", "median"]);
        let mut f = FilterState::new(5, reg.resolve("latest").unwrap()).unwrap();
        let out = run(
            &mut f,
            &[
                Some(1.0),
                Some(9.0),
                Some(3.0),
                Some(2.0),
                Some(7.0),
                Some(3.0),
            ],
        );
        assert_eq!(out[4].mm, 7.0);
        assert_eq!(out[5].mm, 3.0);
    }

    proptest! {
        #[test]
        fn median_within_window_bounds(stream in prop::collection::vec(prop::option::weighted(0.8, 1.0..4000.0f64), 1..40), w in 1usize..8) {
            let mut f = FilterState::median(w).unwrap();
            let out = run(&mut f, &stream);
            for (i, z) in out.iter().enumerate() {
                if i + 1 < w {
                    prop_assert!(z.valid && z.mm == 4000.0);
                    continue;
                }
                let lo = i.saturating_sub(w - 1);
                let vals: Vec<f64> = stream[lo..=i].iter().flatten().copied().collect();
                if vals.is_empty() {
                    prop_assert!(!z.valid);
                } else {
                    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(z.valid && z.mm >= min && z.mm <= max);
                }
            }
        }
    }
}
