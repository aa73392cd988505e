#![no_std]
//! Finite structures, embeddings, ages given by enumerations, amalgamation
//! search and finite prefixes of limit structures.

extern crate alloc;

pub mod ages;
pub mod amalgamation;
pub mod canon;
pub mod embeddings;
pub mod gadgets;
pub mod limits;
pub mod structure;

pub use structure::{Elem, FinStructure, Pointed, Signature, StructError};
pub use embeddings::{compose, enumerate_embeddings, is_embedding, PotentialEmbedding};
