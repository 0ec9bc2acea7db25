//! Command line driver support: graph files, the algorithm library and
//! reference implementations used for validation.

pub mod driver;
pub mod gen;
pub mod graph_io;
pub mod oracle;
pub mod preprocess;
pub mod progen;
pub mod stdlib;
