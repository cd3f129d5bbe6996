pub mod channel;
pub mod config;
pub mod error;
pub mod estimation;
pub mod ici;
pub mod mcsim;
pub mod numerics;
pub mod rate;
pub mod system;

pub use error::{Error, Result};

pub type Complex64 = nalgebra::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/system.md")]
    mod system {}
    #[doc = include_str!("../../../book/src/ici.md")]
    mod ici {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/rate.md")]
    mod rate {}
    #[doc = include_str!("../../../book/src/mcsim.md")]
    mod mcsim {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
