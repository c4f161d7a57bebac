pub mod error;
pub mod operator;
pub mod random;
pub mod clock;
pub mod timeslab;
pub mod spacetime;
pub mod modes;
pub mod scm;
pub mod fock;
pub mod gaussian;
pub mod reference;
pub mod wick;
pub mod phi4;
pub mod fermion;
pub mod report;
pub mod experiments;
