use std::io::{Read, Write};

use super::{ExperimentError, TrialRecord};

pub const TRIAL_LOG_HEADER: [&str; 6] = [
    "participant_id",
    "group",
    "index",
    "true",
    "perceived",
    "response_ms",
];

pub fn write_trial_log<W: Write>(out: W, records: &[TrialRecord]) -> Result<(), ExperimentError> {
    let err = |e: csv::Error| ExperimentError::TrialLog {
        line: 0,
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(TRIAL_LOG_HEADER).map_err(err)?;
    }
    for r in records {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| ExperimentError::TrialLog {
        line: 0,
        message: e.to_string(),
    })
}

pub fn read_trial_log<R: Read>(input: R) -> Result<Vec<TrialRecord>, ExperimentError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| ExperimentError::TrialLog {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(TRIAL_LOG_HEADER) {
        return Err(ExperimentError::TrialLog {
            line: 1,
            message: format!("expected header {}", TRIAL_LOG_HEADER.join(",")),
        });
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| ExperimentError::TrialLog {
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}
