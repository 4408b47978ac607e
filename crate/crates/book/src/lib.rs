//! mdbook cannot run example code against real dependencies, so every
//! chapter of `book/` is included here as module documentation and its
//! fenced Rust blocks run under `cargo test -p goptier-book --doc`. One
//! module per chapter keeps a failing snippet traceable to its file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/storage-model.md")]
pub mod storage_model {}

#[doc = include_str!("../../../book/src/repositories.md")]
pub mod repositories {}

#[doc = include_str!("../../../book/src/synthesis.md")]
pub mod synthesis {}

#[doc = include_str!("../../../book/src/clustering.md")]
pub mod clustering {}

#[doc = include_str!("../../../book/src/policies.md")]
pub mod policies {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
