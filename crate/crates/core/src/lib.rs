pub mod certify;
pub mod config;
pub mod error;
pub mod fieldvals;
pub mod frechet;
pub mod funexpr;
pub mod krylov;
pub mod linalg;
pub mod matfun;
pub mod random;
