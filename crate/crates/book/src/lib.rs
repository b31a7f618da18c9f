//! Compiles the guide's Rust snippets as doctests, one module per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/finite-blocks.md")]
pub mod finite_blocks {}
#[doc = include_str!("../../../book/src/limiting-entropy.md")]
pub mod limiting_entropy {}
#[doc = include_str!("../../../book/src/critical-lines.md")]
pub mod critical_lines {}
#[doc = include_str!("../../../book/src/self-checks.md")]
pub mod self_checks {}
#[doc = include_str!("../../../book/src/extended-precision.md")]
pub mod extended_precision {}
#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
