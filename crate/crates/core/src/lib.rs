pub mod best_approx;
pub mod bounds;
pub mod corpus;
pub mod error;
pub mod extension;
pub mod jackson;
pub mod kernel;
pub mod moduli;
pub mod numeric;
pub mod verify;
