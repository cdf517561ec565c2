use thiserror::Error;

use crate::jet::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),

    #[error("parse error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("schema error: {0}")]
    Schema(String),

    #[error("curve is not regular at t = {t}: |γ′| = {speed:e}")]
    Regularity { t: f64, speed: f64 },
    #[error("curve has an inflection at t = {t}: |γ′×γ″| = {cross:e}")]
    Inflection { t: f64, cross: f64 },
    #[error("torsion vanishes at t = {t} (τ = {tau:e})")]
    ZeroTorsion { t: f64, tau: f64 },
    #[error("height direction is not a unit vector (|w| = {norm})")]
    NonUnitDirection { norm: f64 },
    #[error("versality test: {0}")]
    InconsistentDegrees(String),

    #[error("root refinement did not converge in [{lo}, {hi}]")]
    NonConvergence { lo: f64, hi: f64 },
    #[error("no flattening at t = {t} (τ = {tau:e}, τ′ = {tau_prime:e})")]
    NotAFlattening { t: f64, tau: f64, tau_prime: f64 },
    #[error("no vertex at t = {t} (certificate {certificate:e})")]
    NotAVertex { t: f64, certificate: f64 },
    #[error("no twisting at t = {t} (certificate {certificate:e})")]
    NotATwisting { t: f64, certificate: f64 },
    #[error("degenerate twisting: |δ| = {delta:e} below tolerance")]
    DegenerateDelta { delta: f64 },

    #[error("family has no space cusp at s = 0: {0}")]
    NoCuspAtOrigin(String),
    #[error("lost track of the feature root; last good s = ({}, {})", last_good[0], last_good[1])]
    LostTrack { last_good: [f64; 2] },
    #[error("not enough locus points near the origin ({found})")]
    InsufficientPoints { found: usize },
    #[error("cannot adapt frame: {0}")]
    FrameAdaptation(String),
    #[error("family is not FRS-generic: {0}")]
    NotGeneric(String),

    #[error("nothing to plot")]
    EmptyPlot,
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::LostTrack { .. } => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl serde::Serialize for Error {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
