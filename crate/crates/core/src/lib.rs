//! Comment-aware code translation between C, C++, Go, Java and Python.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] loads benchmark programs with their stdin/stdout test cases.
//! * [`surface`] does comment-aware lexical work: scanning, stripping,
//!   density, a token-stream oracle, method boundaries, code extraction.
//! * [`gateway`] talks to chat-completion endpoints (or a replay script),
//!   renders the prompt templates and caches every exchange.
//! * [`harness`] compiles, runs and judges programs against test cases.
//! * [`orchestrator`] runs the comment-on-failure cascade, the translation
//!   matrix and the variant studies, persisting everything to a run directory.
//! * [`analysis`] turns attempt records into success matrices, gains,
//!   verdict transitions, success-set overlaps and intent statistics.
//! * [`cli`] is the command-line front end used by the `codetrans` binary.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod gateway;
pub mod harness;
pub mod lang;
pub mod orchestrator;
pub mod sim;
pub mod surface;

pub use lang::Language;
