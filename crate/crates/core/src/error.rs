use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A triangle has (numerically) zero area.
    DegenerateTriangle { triangle: usize },
    /// A triangle has negative signed area, i.e. clockwise orientation.
    InvertedTriangle { triangle: usize },
    /// An edge is shared by more than two triangles.
    NonConforming { edge: (usize, usize), count: usize },
    /// Mesh construction input is inconsistent.
    InvalidMesh(String),
    /// A parameter violates its documented range.
    InvalidParameter(String),
    /// Vector or matrix sizes do not agree.
    DimensionMismatch { expected: usize, found: usize },
    /// Requested more corner layers than the mesh contains.
    LayersExceedMesh { requested: usize, available: usize },
    /// A callable returned a non-finite value at a quadrature point.
    NonFiniteValue { x: f64, y: f64 },
    /// A point lies outside the wedge of a re-entrant corner.
    OutsideWedge { x: f64, y: f64 },
    /// Evaluation exactly at the singular point of a function.
    SingularPoint { x: f64, y: f64 },
    /// CG hit the iteration limit.
    CgNotConverged { iterations: usize, residual: f64 },
    /// Power iteration did not settle within the iteration limit.
    PowerIterationStagnated { iterations: usize, relative_change: f64 },
    /// The correction defect has no sign change on the search bracket.
    NoSignChange { level: u32, low: f64, high: f64 },
    /// The secant search for the correction parameter stalled.
    RootNotFound { level: u32, gamma: f64, defect: f64 },
    /// The dual-function annulus leaves the computational domain.
    AnnulusOutsideDomain { r1: f64, distance: f64 },
    /// The domain seen from a corner is not star-shaped.
    NotStarShaped { covered_angle: f64, theta: f64 },
    /// A radial integral did not reach its tolerance.
    QuadratureNotConverged { estimate: f64, error: f64 },
    /// An error norm needing the exact gradient was requested without one.
    MissingGradient,
    /// The time-stepping scheme cannot handle the problem as configured.
    UnsupportedScheme(&'static str),
    /// Explicit time stepping blew up.
    Instability { step: usize, t: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateTriangle { triangle } => {
                write!(f, "triangle {triangle} is degenerate")
            }
            Error::InvertedTriangle { triangle } => {
                write!(f, "triangle {triangle} has negative orientation")
            }
            Error::NonConforming { edge, count } => write!(
                f,
                "edge ({}, {}) is shared by {count} triangles",
                edge.0, edge.1
            ),
            Error::InvalidMesh(msg) => write!(f, "invalid mesh: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::LayersExceedMesh {
                requested,
                available,
            } => write!(
                f,
                "requested {requested} corner layers but the mesh only has {available}"
            ),
            Error::NonFiniteValue { x, y } => {
                write!(f, "non-finite function value at ({x}, {y})")
            }
            Error::OutsideWedge { x, y } => {
                write!(f, "point ({x}, {y}) lies outside the corner wedge")
            }
            Error::SingularPoint { x, y } => {
                write!(f, "evaluation at the singular point ({x}, {y})")
            }
            Error::CgNotConverged {
                iterations,
                residual,
            } => write!(
                f,
                "CG did not converge in {iterations} iterations (relative residual {residual:e})"
            ),
            Error::PowerIterationStagnated {
                iterations,
                relative_change,
            } => write!(
                f,
                "power iteration stagnated after {iterations} iterations (last change {relative_change:e})"
            ),
            Error::NoSignChange { level, low, high } => write!(
                f,
                "energy defect has no sign change on level {level} (g(low) = {low:e}, g(high) = {high:e})"
            ),
            Error::RootNotFound {
                level,
                gamma,
                defect,
            } => write!(
                f,
                "correction parameter search stalled on level {level} at gamma = {gamma} (defect {defect:e})"
            ),
            Error::AnnulusOutsideDomain { r1, distance } => write!(
                f,
                "cutoff radius {r1} exceeds the distance {distance} from the corner to the boundary"
            ),
            Error::NotStarShaped {
                covered_angle,
                theta,
            } => write!(
                f,
                "boundary covers an angle of {covered_angle} seen from the corner, expected {theta}"
            ),
            Error::QuadratureNotConverged { estimate, error } => write!(
                f,
                "quadrature did not converge (estimate {estimate}, error {error:e})"
            ),
            Error::MissingGradient => write!(f, "exact gradient required for this norm"),
            Error::UnsupportedScheme(msg) => write!(f, "unsupported scheme: {msg}"),
            Error::Instability { step, t } => {
                write!(f, "explicit time stepping became unstable at step {step} (t = {t})")
            }
        }
    }
}

impl core::error::Error for Error {}
