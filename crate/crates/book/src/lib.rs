//! The guide's chapters, compiled as doc-tests so the snippets stay in step
//! with the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

#[doc = include_str!("../../../book/src/radio.md")]
pub mod radio {}

#[doc = include_str!("../../../book/src/traffic.md")]
pub mod traffic {}

#[doc = include_str!("../../../book/src/ran.md")]
pub mod ran {}

#[doc = include_str!("../../../book/src/bus.md")]
pub mod bus {}

#[doc = include_str!("../../../book/src/controllers.md")]
pub mod controllers {}

#[doc = include_str!("../../../book/src/engine.md")]
pub mod engine {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
