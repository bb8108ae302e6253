//! Unique hard-attention transformers, B-RASP programs and LTL formulas as
//! exact language acceptors over finite words, with translations between
//! them, a tiling-problem compiler, and bounded search over word spaces.

pub mod analysis;
pub mod brasp;
pub mod lang;
pub mod ltl;
pub mod numeric;
pub mod tiling;
pub mod translate;
pub mod uhat;
