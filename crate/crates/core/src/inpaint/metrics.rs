use crate::inpaint::IterationRecord;

/// Mean acceleration error over instrumented iterations, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelerationSummary {
    /// `None` when no iteration contributed.
    pub mean_percent: Option<f64>,
    pub contributing: usize,
    /// Iterations where the oracle cost was 0 but the refined one was not.
    pub zero_oracle_excluded: usize,
}

/// Per iteration `z / bf - 1`; iterations with `bf = 0` count as 0 when
/// `z = 0` too and are set aside otherwise. Records without an oracle
/// value are ignored.
pub fn acceleration_error(records: &[IterationRecord]) -> AccelerationSummary {
    let mut sum = 0.0;
    let mut contributing = 0;
    let mut excluded = 0;
    for r in records {
        let Some(bf) = r.bf_error else { continue };
        if bf > 0.0 {
            sum += r.z_error / bf - 1.0;
            contributing += 1;
        } else if r.z_error == 0.0 {
            contributing += 1;
        } else {
            excluded += 1;
        }
    }
    AccelerationSummary {
        mean_percent: (contributing > 0).then(|| 100.0 * sum / contributing as f64),
        contributing,
        zero_oracle_excluded: excluded,
    }
}
