pub mod algebra;
pub mod fock;
pub mod frontend;
pub mod matrix;
pub mod realize;
pub mod scalar;
pub mod system;
