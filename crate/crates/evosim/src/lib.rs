//! Deterministic simulator for asynchronous steady-state evolutionary search
//! with hidden evaluation and compute-scaling analysis.
//!
//! The crate models a research-agent fleet as a discrete-event simulation:
//! a fixed pool of stochastic workers executes draft/mutate/crossover
//! operators over a population of candidates, an orchestrator dispatches new
//! work the moment a worker frees up (no generation barriers), and an
//! evaluation layer scores candidates against frozen data splits while
//! enforcing who may see which split. On top of the simulator sit the
//! compute-scaling tools: fitting the joint law over worker count and
//! budget, and deriving compute-optimal allocations from it.
//!
//! Everything is reproducible: one master seed derives independent named
//! random streams, virtual time replaces wall clocks, and all exports
//! iterate in insertion order. The `examples/` directory walks through each
//! major capability; the `evosim` binary exposes the same flows as
//! subcommands.

pub mod cli;
pub mod config;
pub mod evaluation;
pub mod orchestrator;
pub mod population;
pub mod report;
pub mod scaling;
pub mod selection;
pub mod sim;
pub mod stats;
pub mod task;
pub mod worker;
