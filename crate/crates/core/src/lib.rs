//! Decentralized consensus optimization over simulated multi-agent networks.
//!
//! A network of `m` agents cooperatively minimizes `sum_i f_i(x)` subject to
//! per-agent constraint sets, reformulated with the graph Laplacian as
//! `min F(x) s.t. L x = 0` and solved through its saddle-point form. Three
//! solvers are provided:
//!
//! * [`solver::run_dpd`] — decentralized primal-dual iterations with exact
//!   per-agent proximal subproblem solves,
//! * [`solver::run_dcs`] — communication sliding: each outer round keeps the
//!   two broadcasts but replaces the exact subproblem solve with `T_k` local
//!   subgradient steps (no extra communication),
//! * [`solver::run_sdcs`] — the stochastic variant driven by seeded,
//!   reproducible stochastic subgradient oracles.
//!
//! Every inter-node exchange goes through the synchronous round layer in
//! [`netsim`], which enforces neighborhood locality and counts communication
//! rounds and oracle calls exactly. [`schedule`] builds and validates the
//! parameter sequences the convergence theory requires, [`metrics`] evaluates
//! gap functions, residuals and the theorem right-hand sides against a
//! certified centralized reference, and [`bench`] orchestrates experiments
//! from declarative configs into CSV/JSON result bundles.

pub mod bench;
pub mod metrics;
pub mod model;
pub mod netsim;
pub mod schedule;
pub mod solver;
pub mod topology;
