// Negated float comparisons are used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bipartite;
pub mod broadcast;
pub mod certify;
pub mod harness;
pub mod matcore;
pub mod quantum;
pub mod sdp;
