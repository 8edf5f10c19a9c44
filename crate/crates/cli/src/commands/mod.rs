pub mod bounds;
pub mod figures;
pub mod validate;
