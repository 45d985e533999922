//! Stacking two tilted frames into one elevation-binned grid.

use serde::{Deserialize, Serialize};

use super::{DepthFrame, DualRig, Grid, SensorPose, TofError, ZoneReading};
use crate::geometry::HitTarget;

/// Rows must land on a shared elevation lattice to this precision.
const ALIGN_TOL_DEG: f64 = 1e-6;

/// Both sensors' rows re-indexed on one elevation axis, top row first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedGrid {
    pub tick: u64,
    pub cells: Grid<ZoneReading>,
    /// Boresight elevation of each row in degrees.
    pub row_elevation_deg: Vec<f64>,
    pub sentinel_mm: f64,
}

impl CombinedGrid {
    pub fn rows(&self) -> usize {
        self.cells.rows()
    }

    pub fn cols(&self) -> usize {
        self.cells.cols()
    }

    /// Builds a grid directly from millimeter values; `None` marks an invalid cell.
    pub fn from_mm(tick: u64, rows: &[Vec<Option<f64>>], sentinel_mm: f64) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let cells = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged grid");
                r.iter().map(|c| match c {
                    Some(mm) => ZoneReading::valid(*mm),
                    None => ZoneReading::invalid(sentinel_mm),
                })
            })
            .collect();
        Self {
            tick,
            cells: Grid::from_vec(rows.len(), cols, cells),
            row_elevation_deg: vec![0.0; rows.len()],
            sentinel_mm,
        }
    }

    /// A grid where every cell reports "no target".
    pub fn all_sentinel(tick: u64, rows: usize, cols: usize, sentinel_mm: f64) -> Self {
        Self {
            tick,
            cells: Grid::filled(rows, cols, ZoneReading::valid(sentinel_mm)),
            row_elevation_deg: vec![0.0; rows],
            sentinel_mm,
        }
    }
}

/// Maps every sensor row onto the combined row index.
struct RowLayout {
    upper: Vec<usize>,
    lower: Vec<usize>,
    elevations: Vec<f64>,
}

fn layout(rig: &DualRig) -> Result<RowLayout, TofError> {
    let (u, l) = (&rig.upper, &rig.lower);
    if u.zones_per_side != l.zones_per_side {
        return Err(TofError::GeometryMismatch(format!(
            "zone counts differ: {} vs {}",
            u.zones_per_side, l.zones_per_side
        )));
    }
    let step = u.zone_step_deg();
    if (step - l.zone_step_deg()).abs() > ALIGN_TOL_DEG {
        return Err(TofError::GeometryMismatch(format!(
            "zone pitch differs: {step}° vs {}°",
            l.zone_step_deg()
        )));
    }
    if u.max_range != l.max_range {
        return Err(TofError::GeometryMismatch("sensor ranges differ".into()));
    }
    let n = u.zones_per_side;
    let top = u.row_elevation_deg(0).max(l.row_elevation_deg(0));
    let index = |pose: &SensorPose| -> Result<Vec<usize>, TofError> {
        (0..n)
            .map(|r| {
                let exact = (top - pose.row_elevation_deg(r)) / step;
                let rounded = exact.round();
                if ((exact - rounded) * step).abs() > ALIGN_TOL_DEG {
                    return Err(TofError::GeometryMismatch(format!(
                        "row {r} at {:.6}° is off the {step}° lattice",
                        pose.row_elevation_deg(r)
                    )));
                }
                Ok(rounded as usize)
            })
            .collect()
    };
    let upper = index(u)?;
    let lower = index(l)?;
    let rows = upper.iter().chain(&lower).max().map_or(0, |m| m + 1);
    let elevations = (0..rows).map(|i| top - i as f64 * step).collect();
    Ok(RowLayout {
        upper,
        lower,
        elevations,
    })
}

/// Fuses the two frames of `rig`. Where rows overlap the nearer valid reading
/// wins; a cell is invalid only when every contributor is.
pub fn fuse(
    upper: &DepthFrame,
    lower: &DepthFrame,
    rig: &DualRig,
) -> Result<CombinedGrid, TofError> {
    if upper.tick != lower.tick {
        return Err(TofError::TickMismatch {
            upper: upper.tick,
            lower: lower.tick,
        });
    }
    let lay = layout(rig)?;
    let n = rig.upper.zones_per_side;
    for f in [upper, lower] {
        if f.zones.rows() != n || f.zones.cols() != n {
            return Err(TofError::GeometryMismatch(format!(
                "frame is {}x{}, rig expects {n}x{n}",
                f.zones.rows(),
                f.zones.cols()
            )));
        }
    }
    let sentinel = rig.upper.max_range_mm();
    let mut cells = Grid::filled(lay.elevations.len(), n, None::<f64>);
    let mut seen = Grid::filled(lay.elevations.len(), n, false);
    for (frame, rows) in [(upper, &lay.upper), (lower, &lay.lower)] {
        for (r, &target_row) in rows.iter().enumerate() {
            for c in 0..n {
                *seen.get_mut(target_row, c) = true;
                let z = frame.zones.get(r, c);
                if z.valid {
                    let cell = cells.get_mut(target_row, c);
                    *cell = Some(cell.map_or(z.mm, |m: f64| m.min(z.mm)));
                }
            }
        }
    }
    let readings = (0..lay.elevations.len())
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| match cells.get(r, c) {
            Some(mm) => ZoneReading::valid(*mm),
            // rows no sensor covers read as "no target"
            None if !seen.get(r, c) => ZoneReading::valid(sentinel),
            None => ZoneReading::invalid(sentinel),
        })
        .collect();
    Ok(CombinedGrid {
        tick: upper.tick,
        cells: Grid::from_vec(lay.elevations.len(), n, readings),
        row_elevation_deg: lay.elevations,
        sentinel_mm: sentinel,
    })
}

/// Fuses per-zone hit targets with the same nearest-wins rule as [`fuse`].
/// Used for attributing detections to obstacles.
pub fn fuse_targets(
    upper: (&DepthFrame, &Grid<HitTarget>),
    lower: (&DepthFrame, &Grid<HitTarget>),
    rig: &DualRig,
) -> Result<Grid<HitTarget>, TofError> {
    let lay = layout(rig)?;
    let n = rig.upper.zones_per_side;
    let mut best = Grid::filled(lay.elevations.len(), n, (f64::INFINITY, HitTarget::Nothing));
    for ((frame, targets), rows) in [(upper, &lay.upper), (lower, &lay.lower)] {
        for (r, &tr) in rows.iter().enumerate() {
            for c in 0..n {
                let z = frame.zones.get(r, c);
                let slot = best.get_mut(tr, c);
                if z.valid && z.mm < slot.0 {
                    *slot = (z.mm, *targets.get(r, c));
                }
            }
        }
    }
    Ok(best.map(|(_, t)| *t))
}
