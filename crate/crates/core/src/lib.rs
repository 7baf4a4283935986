// SPDX-License-Identifier: Apache-2.0

//! Cost and performance models for serverless versus serverful cloud
//! deployments.
//!
//! - [`catalog`]: priced compute and storage services
//! - [`commpatterns`]: message counts for broadcast, aggregation and shuffle
//! - [`shuffleplan`]: shuffles staged through external storage
//! - [`workloads`]: task graphs and invocation traces
//! - [`simcore`]: FaaS platform simulation and billing
//! - [`placement`]: co-locating tasks to cut cross-instance traffic

pub mod catalog;
pub mod commpatterns;
pub mod money;
pub mod placement;
pub mod repro;
pub mod shuffleplan;
pub mod simcore;
pub mod units;
pub mod workloads;
