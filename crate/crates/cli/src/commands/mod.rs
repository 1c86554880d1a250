pub mod bias;
pub mod eval;
pub mod fit;
pub mod fresh;
pub mod harmonics;
pub mod meta;
pub mod mire;
pub mod pyramid;
pub mod riesz;
