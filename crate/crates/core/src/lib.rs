pub mod answer;
pub mod config;
pub mod data;
pub mod eval;
pub mod image;
pub mod kb;
pub mod linker;
pub mod question;
pub mod session;
pub mod sparql;
pub mod store;
pub mod vocab;
