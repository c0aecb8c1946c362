//! Bundled environments.

pub mod finesse;
pub mod hanabi;
pub mod random;
pub mod tiger;

pub use finesse::{check_finesse_complete, classify_finesse, mine_finesse_able, FinesseRecord};
pub use hanabi::{HanabiParams, MiniHanabi, ScriptedHanabi};
pub use random::TwoTurnGame;
pub use tiger::{Lever, TigerParams, TrampolineTiger};
