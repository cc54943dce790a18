pub mod cli;
pub mod constructor;
pub mod exact;
pub mod heisenberg;
pub mod model_file;
pub mod pauli;
pub mod report;
pub mod witness;
