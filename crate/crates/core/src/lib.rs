pub mod approx;
pub mod density;
pub mod diffquot;
pub mod error;
pub mod harness;
pub mod measures;
pub mod quadrature;
pub mod rational;
pub mod region;
pub mod scalar;
pub mod sum;

pub use num_complex::Complex;

pub type Region64 = region::Region<f64>;
pub type RationalFunction64 = rational::RationalFunction<f64>;
pub type WeightFunction64 = quadrature::WeightFunction<f64>;
pub type PointFunctional64 = measures::PointFunctional<f64>;
pub type DensitySet64 = density::DensitySet<f64>;
