use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("component {component}: invalid {field}: {reason}")]
    InvalidComponent {
        component: String,
        field: &'static str,
        reason: String,
    },

    #[error("binary interaction matrix: {0}")]
    InvalidBip(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no compressibility root above the covolume (A = {a}, B = {b})")]
    NoPhysicalRoot { a: f64, b: f64 },

    #[error("no liquid root at T = {temperature} K, P = {pressure} Pa")]
    NoLiquidRoot { temperature: f64, pressure: f64 },

    #[error(
        "temperature {temperature} K outside ideal-gas cp range [{t_min}, {t_max}] K of {component}"
    )]
    TemperatureOutOfRange {
        component: String,
        temperature: f64,
        t_min: f64,
        t_max: f64,
    },

    #[error("Rachford-Rice: {0}")]
    RachfordRice(#[from] RachfordRiceError),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("target enthalpy {target} J/mol not reachable in [{t_low}, {t_high}] K")]
    UnreachableEnthalpy { target: f64, t_low: f64, t_high: f64 },

    #[error("no stock-tank liquid left; gas-oil ratio is infinite")]
    InfiniteGor,

    #[error("flash failed at f_g = {f_g}: {source}")]
    FlashAtFraction {
        f_g: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("percent error undefined for a zero reference")]
    ZeroReference,
}

/// Outcomes of the Rachford-Rice solve that do not yield a vapor fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RachfordRiceError {
    #[error("all K-values above one; feed is single-phase vapor")]
    AllVapor,
    #[error("all K-values below one; feed is single-phase liquid")]
    AllLiquid,
    #[error("all K-values equal to one; trivial solution")]
    Trivial,
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
