//! Experiment driver for any-dimensional polynomial lower bounds: cost
//! expressions, setting/domain compatibility, sweep dispatch, and CSV
//! emission. The binary `anydim` is a thin command-line layer over this.

pub mod experiment;
pub mod expr;

pub use experiment::{
    check_compatible, dualize_rows, emit_csv, emit_verify_csv, named_cost, parse_n_range,
    read_config, read_csv, run, verify_identity, verify_tv, verify_w1, CliError, CliResult,
    CsvRow, DomainSpec, ExperimentSpec, Setting, SolverChoice, VerifyRow,
};
pub use expr::{parse_cost, CostAtom, CostExpr, Family, ParseError};
