pub mod filterpipe;
pub mod io;
pub mod metrics;
pub mod retarget;
pub mod rotmath;
pub mod scenario;
pub mod synth;
pub mod trajectory;
