use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The rational form of the autonomous CF lost its denominator.
    #[error("numerical instability at u={u}, t={t}: denominator magnitude {magnitude:e} below floor")]
    NumericalInstability { u: f64, t: f64, magnitude: f64 },

    #[error("adaptive quadrature on [{a}, {b}] did not converge within {max_depth} refinements")]
    QuadratureNonConvergence { a: f64, b: f64, max_depth: u32 },

    #[error("tail mass {tail:e} beyond kmax={kmax} exceeds tolerance {tol:e}")]
    TailMass { kmax: usize, tail: f64, tol: f64 },

    #[error("aliasing violation: unrecovered mass {tail_bound:e} >= tolerance {tail_tol:e}; enlarge grid_size/kmax")]
    Aliasing { tail_bound: f64, tail_tol: f64 },

    #[error("recovered mass {total} exceeds one")]
    MassExcess { total: f64 },

    #[error("non-real probability at i={index}: imaginary residue {residue:e}")]
    NonRealProbability { index: usize, residue: f64 },

    #[error("negative probability {value:e} at i={index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("unstable step: dt*rate = {courant} exceeds 0.5")]
    Stability { courant: f64 },

    #[error("truncation lost mass {lost:e}, limit {limit:e}")]
    MassLoss { lost: f64, limit: f64 },

    #[error("replication {replication} exceeded {events} events")]
    SimulationCap { replication: u64, events: u64 },

    #[error("cell (b={b}, t={t}): {source}")]
    Cell {
        b: f64,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_cell(self, b: f64, t: f64) -> Self {
        Error::Cell {
            b,
            t,
            source: Box::new(self),
        }
    }
}
