use freqsec::assessment::AssessmentError;

pub const CONFIG: u8 = 2;
pub const SIMULATION: u8 = 3;
pub const FIT: u8 = 4;
pub const ASSESSMENT: u8 = 5;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: anyhow::Error) -> Self {
        Self { code: CONFIG, error }
    }

    pub fn simulation(error: anyhow::Error) -> Self {
        Self {
            code: SIMULATION,
            error,
        }
    }

    pub fn fit(error: anyhow::Error) -> Self {
        Self { code: FIT, error }
    }

    /// Output files that cannot be written count as configuration errors.
    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Self::config(error.into())
    }

    pub fn from_assessment(e: AssessmentError) -> Self {
        let code = match &e {
            AssessmentError::Simulation { .. } => SIMULATION,
            AssessmentError::Fit { .. } => FIT,
            AssessmentError::InvalidTable(_)
            | AssessmentError::InvalidCase(_)
            | AssessmentError::NoScenarios
            | AssessmentError::Json(_)
            | AssessmentError::Io(_) => CONFIG,
            _ => ASSESSMENT,
        };
        Self {
            code,
            error: e.into(),
        }
    }
}
