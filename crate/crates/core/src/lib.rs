//! AtMost-NValue consistency, kernelization and propagation, parameterized
//! by the number of holes in the domains.

pub mod backdoor;
pub mod domain;
pub mod exec;
pub mod format;
pub mod generate;
mod group;
pub mod kernel;
pub mod propagate;
pub mod reduce;
pub mod solve;

pub use domain::{Instance, Interval, Role, Solution, Span, Value, VarId};
pub use exec::Exec;
pub use kernel::{kernelize, Kernel, KernelStatus};
pub use solve::{solve, SolveReport, Verdict};
