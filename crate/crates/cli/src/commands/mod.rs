pub mod derive;
pub mod filter_response;
pub mod g2_curve;
pub mod g3_points;
pub mod oracle_compare;
pub mod region;
