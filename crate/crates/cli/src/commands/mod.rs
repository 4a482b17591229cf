mod connect;
mod diagnose;
mod partition;
mod solve;
mod steiner;

pub use connect::connect1d;
pub use diagnose::diagnose;
pub use partition::partition;
pub use solve::solve;
pub use steiner::steiner;

use serde_json::{json, Value};

/// JSON for an optional numeric result, with the error message when absent.
fn value_or_error<T: serde::Serialize>(r: aclab::Result<T>) -> Value {
    match r {
        Ok(v) => json!({ "value": v }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}
