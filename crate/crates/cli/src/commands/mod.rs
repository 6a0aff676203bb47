pub mod certify;
pub mod predict;
pub mod simulate;
pub mod sweep;

pub use certify::cmd_certify;
pub use predict::cmd_predict;
pub use simulate::cmd_simulate;
pub use sweep::cmd_sweep;
