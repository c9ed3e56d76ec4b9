//! Finite filtered probability spaces, adapted processes, stopping times,
//! conditional expectation, and the randomized martingale generator.

pub mod generate;
pub mod ops;
pub mod process;
pub mod space;

pub use generate::{
    check_dominance, generate_martingale, jump_dominating, random_spec, JumpLaw, MartingaleSpec,
    ATOM_CAP,
};
pub use ops::{cond_expect, cond_expect_slice, hitting_time, is_martingale, stop_process};
pub use process::{Adaptedness, Process};
pub use space::{FilteredSpace, StoppingTime};
