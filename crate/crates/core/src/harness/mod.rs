//! Scenario files, replicated experiments and result tables.

mod experiments;
mod pool;
mod results;
mod scenario;

pub use experiments::*;
pub use pool::map_indexed;
pub use results::{
    emit_results, format_g9, meta_path, Metadata, ResultRow, ResultTable, CSV_HEADER,
};
pub use scenario::*;
