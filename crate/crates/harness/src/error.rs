use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] symcanon::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("training diverged in {mode} at epoch {epoch}: loss is {loss}")]
    Diverged {
        mode: &'static str,
        epoch: usize,
        loss: f64,
    },
    #[error("invalid model file: {0}")]
    Model(String),
}

impl HarnessError {
    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            HarnessError::Diverged { .. } => true,
            HarnessError::Core(e) => matches!(
                e,
                symcanon::Error::NoConvergence { .. }
                    | symcanon::Error::DegenerateConfiguration(_)
                    | symcanon::Error::GroupNotFinite { .. }
            ),
            _ => false,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
