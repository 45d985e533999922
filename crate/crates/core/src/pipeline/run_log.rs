//! Run-log CSV: one row per tick.

use std::io::{Read, Write};

use super::{ObstacleReport, PipelineError};
use crate::haptics::{Motor, MotorMask};

pub const RUN_LOG_HEADER: [&str; 6] = [
    "tick",
    "quadrant_min_L1",
    "quadrant_min_L2",
    "quadrant_min_R1",
    "quadrant_min_R2",
    "mask",
];

fn log_err(line: usize, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Log {
        line,
        message: e.to_string(),
    }
}

/// Writes reports with distances rounded to 0.1 mm.
pub fn write_run_log<W: Write>(out: W, reports: &[ObstacleReport]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_LOG_HEADER).map_err(|e| log_err(0, e))?;
    for r in reports {
        let mut rec = vec![r.tick.to_string()];
        rec.extend(Motor::ALL.iter().map(|m| format!("{:.1}", r.min_for(*m))));
        rec.push(r.mask.log_name());
        w.write_record(&rec).map_err(|e| log_err(0, e))?;
    }
    w.flush().map_err(|e| log_err(0, e))
}

/// Reads a run log back. Trigger flags are reconstructed from the mask.
pub fn read_run_log<R: Read>(input: R) -> Result<Vec<ObstacleReport>, PipelineError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| log_err(1, e))?;
    if header.iter().ne(RUN_LOG_HEADER) {
        return Err(log_err(1, "unexpected header"));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| log_err(line, e))?;
        if rec.len() != RUN_LOG_HEADER.len() {
            return Err(log_err(line, "wrong number of fields"));
        }
        let tick = rec[0].parse().map_err(|e| log_err(line, e))?;
        let mut mins = [0.0; 4];
        for (slot, field) in mins.iter_mut().zip(rec.iter().skip(1)) {
            *slot = field.parse().map_err(|e| log_err(line, e))?;
        }
        let mask = MotorMask::parse_log_name(&rec[5]).map_err(|e| log_err(line, e))?;
        out.push(ObstacleReport {
            tick,
            quadrant_min_mm: mins,
            triggered: Motor::ALL.map(|m| mask.contains(m)),
            mask,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haptics::parse;

    #[test]
    fn round_trip() {
        let reports = vec![
            ObstacleReport {
                tick: 0,
                quadrant_min_mm: [4000.0; 4],
                triggered: [false; 4],
                mask: MotorMask::EMPTY,
            },
            ObstacleReport {
                tick: 1,
                quadrant_min_mm: [1500.5, 812.3, 4000.0, 799.9],
                triggered: [false, true, false, true],
                mask: parse("L2+R2").unwrap(),
            },
        ];
        let mut buf = Vec::new();
        write_run_log(&mut buf, &reports).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "tick,quadrant_min_L1,quadrant_min_L2,quadrant_min_R1,quadrant_min_R2,mask\n"
        ));
        assert!(text.contains("1,1500.5,812.3,4000.0,799.9,L2+R2"));
        assert_eq!(read_run_log(buf.as_slice()).unwrap(), reports);
    }

    #[test]
    fn bad_rows_report_line() {
        let text = "tick,quadrant_min_L1,quadrant_min_L2,quadrant_min_R1,quadrant_min_R2,mask\n0,1,2,3,4,none\n1,1,2,3,4,L9\n";
        match read_run_log(text.as_bytes()) {
            Err(PipelineError::Log { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
