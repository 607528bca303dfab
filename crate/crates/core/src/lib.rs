pub mod error;
pub mod scalar;
pub mod series;
pub mod signature;
pub mod curves;
pub mod germs;
pub mod conjugator;
