pub mod curves;
pub mod fit;
pub mod oracle;
pub mod simulate;
pub mod spectrum;
