pub mod cli;
pub mod distance_measure;
pub mod energy;
pub mod error;
pub mod measure;
pub mod optimize;
pub mod polarization;
pub mod quad;
pub mod report;
pub mod reverse_triangle;
pub mod search;
pub mod sets;
pub mod specfun;

pub use error::{Error, Result};
pub use measure::{MeasureLabel, QuadratureMeasure};
pub use sets::{Configuration, Point, SetDescriptor};
pub use specfun::RieszParams;
