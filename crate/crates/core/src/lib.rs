pub mod error;
pub mod linalg;
pub mod matrix_oracle;
pub mod quad;
pub mod random;
pub mod report;
pub mod torus;
pub mod sum_rules;
pub mod constants;
pub mod bounds;
pub mod riesz;
pub mod lieb_thirring;
pub mod lattice;
pub mod sphere;
pub mod experiment;
